//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pgcomp_core::automorphism::all_automorphisms;
use pgcomp_core::distribution::{comm_profile, integer_lower_bound, lower_bound_check, Block};
use pgcomp_core::lu::{build_schedule, normalized_time, Category, CycleLog, Phase};
use pgcomp_core::mtx::read_matrix_market_file;
use pgcomp_core::spmv::pack_block;
use pgcomp_core::{
    incident, pcg_solve, projective_distribution, rowwise_distribution, run_scheme, standard_matchings, tile_matrix,
    BlockLUProblem, CsrMatrix, DistributionMap, MatrixGenerator, PcgOptions, ProjectiveSpace, Scheme, SpmvPlan,
};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn wrap<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn geometry_counts() -> Check {
    let t = Instant::now();
    let s = wrap(ProjectiveSpace::with_order(4, 2, &[1, 2]))?;
    let lines = wrap(s.lines())?;
    let planes = wrap(s.planes())?;
    ensure(s.point_count() == 31, format!("{} points", s.point_count()))?;
    ensure(lines.len() == 155, format!("{} lines", lines.len()))?;
    ensure(planes.len() == 155, format!("{} planes", planes.len()))?;
    ensure(lines.iter().all(|l| l.len() == 3), "points per line")?;
    ensure(planes.iter().all(|p| p.len() == 7), "points per plane")?;
    for p in planes {
        ensure(wrap(s.lines_in(p))?.len() == 7, "lines per plane")?;
    }
    for l in lines {
        ensure(planes.iter().filter(|p| incident(l, p)).count() == 7, "planes per line")?;
    }
    for x in 0..31 {
        ensure(lines.iter().filter(|l| l.contains(x)).count() == 15, "lines per point")?;
        ensure(planes.iter().filter(|p| p.contains(x)).count() == 35, "planes per point")?;
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 1.0, format!("took {secs:.2} s"))?;
    Ok(format!("31/155/155, 3/7/7/7/15/35 in {secs:.3} s"))
}

fn fano_plane() -> Check {
    let s = wrap(ProjectiveSpace::with_order(2, 2, &[1]))?;
    let got: BTreeSet<Vec<u32>> = wrap(s.lines())?.iter().map(|l| l.points().to_vec()).collect();
    let want: BTreeSet<Vec<u32>> = [
        [0, 1, 3],
        [0, 2, 6],
        [1, 2, 4],
        [0, 4, 5],
        [1, 5, 6],
        [2, 3, 5],
        [3, 4, 6],
    ]
    .iter()
    .map(|l| l.to_vec())
    .collect();
    ensure(got == want, format!("lines {got:?}"))?;
    Ok("7 lines equal".into())
}

fn connection_table() -> Check {
    let s = wrap(ProjectiveSpace::with_order(2, 3, &[]))?;
    let got = wrap(s.cyclic_lines())?;
    ensure(got.len() == 13, "13 lines")?;
    for (k, line) in got.iter().enumerate() {
        let want: Vec<u32> = [6, 7, 9, 2].iter().map(|&x| (x + k as u32) % 13).collect();
        ensure(*line == want, format!("line {k}: {line:?} vs {want:?}"))?;
    }
    Ok("13 rows equal".into())
}

const OWNERS_P3: [[u32; 13]; 13] = [
    [0, 7, 6, 7, 11, 11, 4, 11, 6, 7, 4, 4, 6],
    [7, 1, 8, 7, 8, 12, 12, 5, 12, 7, 8, 5, 5],
    [6, 8, 2, 9, 8, 9, 0, 0, 6, 0, 8, 9, 6],
    [7, 7, 9, 3, 10, 9, 10, 1, 1, 7, 1, 9, 10],
    [11, 8, 8, 10, 4, 11, 10, 11, 2, 2, 8, 2, 10],
    [11, 12, 9, 9, 11, 5, 12, 11, 12, 3, 3, 9, 3],
    [4, 12, 0, 10, 10, 12, 6, 0, 12, 0, 4, 4, 10],
    [11, 5, 0, 1, 11, 11, 0, 7, 1, 0, 1, 5, 5],
    [6, 12, 6, 1, 2, 12, 12, 1, 8, 2, 1, 2, 6],
    [7, 7, 0, 7, 2, 3, 0, 0, 2, 9, 3, 2, 3],
    [4, 8, 8, 1, 8, 3, 4, 1, 1, 3, 10, 4, 3],
    [4, 5, 9, 9, 2, 9, 4, 5, 2, 2, 4, 11, 5],
    [6, 5, 6, 10, 10, 3, 10, 5, 6, 3, 3, 5, 12],
];

fn projective_p3() -> Check {
    let m = wrap(projective_distribution(3))?;
    let got = m.owner_matrix();
    for (i, row) in OWNERS_P3.iter().enumerate() {
        ensure(got[i] == row.to_vec(), format!("row {i}: {:?}", got[i]))?;
    }
    let want: Vec<Block> = vec![
        (0, 0),
        (6, 7),
        (6, 9),
        (6, 2),
        (7, 6),
        (7, 9),
        (7, 2),
        (9, 6),
        (9, 7),
        (9, 2),
        (2, 6),
        (2, 7),
        (2, 9),
    ];
    ensure(m.blocks_of(0) == want.as_slice(), format!("process 0: {:?}", m.blocks_of(0)))?;
    Ok("169 owners and process 0 list equal".into())
}

fn communication_optimality() -> Check {
    let t = Instant::now();
    let mut notes = Vec::new();
    for (n, p) in [(7u32, 2u64), (13, 3), (21, 4), (31, 5)] {
        let prof = comm_profile(&wrap(projective_distribution(p))?);
        let lines = wrap(wrap(ProjectiveSpace::with_order(2, p, &[]))?.cyclic_lines())?;
        let bound = integer_lower_bound(n);
        let rc = 2 * (p as usize + 1);
        for pc in &prof.processes {
            // p + 1 inputs and p + 1 partial sums, one fewer of each when
            // the process's own point lies on its line
            let want = if lines[pc.process as usize].contains(&pc.process) { 2 * p as usize } else { rc };
            ensure(pc.messages() == want, format!("n={n} process {}: {} messages", pc.process, pc.messages()))?;
        }
        ensure(prof.max_messages <= rc, format!("n={n}: {} messages", prof.max_messages))?;
        ensure(rc as u32 <= bound + 2, format!("n={n}: {rc} vs bound {bound}"))?;
        let rep = wrap(lower_bound_check(n, 200, 1000 + n as u64))?;
        ensure(rep.samples_rc_ge_n == 200, format!("n={n}: r*c >= n in {} of 200", rep.samples_rc_ge_n))?;
        ensure(
            rep.samples_sum_ge_bound == 200,
            format!("n={n}: r+c >= bound in {} of 200", rep.samples_sum_ge_bound),
        )?;
        notes.push(format!("n={n}: at most {rc} messages, bound {bound}"));
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 10.0, format!("took {secs:.2} s"))?;
    Ok(format!("{} in {secs:.2} s", notes.join(", ")))
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

fn test_matrices() -> Result<Vec<(String, CsrMatrix)>, String> {
    let mut out = vec![(
        "poisson2d:10".to_string(),
        wrap(wrap("poisson2d:10".parse::<MatrixGenerator>())?.generate())?,
    )];
    for f in ["stiff1d_48.mtx", "lap3d_4.mtx", "band_40.mtx"] {
        out.push((f.to_string(), wrap(read_matrix_market_file(&data_dir().join(f)))?));
    }
    Ok(out)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Result<f64, String> {
    let ax = wrap(a.matvec(x))?;
    let r: Vec<f64> = ax.iter().zip(b).map(|(u, v)| v - u).collect();
    Ok(norm(&r) / norm(b))
}

/// Largest per-process count of vector-block messages in one product.
fn messages_per_product(dist: &DistributionMap, a: &CsrMatrix) -> Result<u64, String> {
    let blocked = wrap(tile_matrix(a, dist.n() as usize))?;
    let plan = wrap(SpmvPlan::new(dist, &blocked, false))?;
    let x = wrap(pgcomp_core::BlockedVector::split(blocked.partition(), &vec![1.0; a.nrows()]))?;
    let (_, log) = wrap(plan.execute(&x))?;
    Ok(log.processes.iter().map(|p| p.block_messages()).max().unwrap_or(0))
}

fn spmv_pcg() -> Check {
    let opts = PcgOptions {
        i_max: 2000,
        eps: 1e-10,
        packing: false,
    };
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    for (name, a) in wrap(test_matrices())? {
        let xt: Vec<f64> = (0..a.nrows()).map(|i| 1.0 + (i % 7) as f64 * 0.25).collect();
        let b = wrap(a.matvec(&xt))?;
        let seq = wrap(pcg_solve(&a, &b, None, &opts, &wrap(rowwise_distribution(1))?))?;
        ensure(seq.converged, format!("{name}: sequential run did not converge"))?;
        let scale = norm(&seq.x);
        for p in [2u64, 3] {
            let proj = wrap(projective_distribution(p))?;
            let n = proj.n();
            let row = wrap(rowwise_distribution(n))?;
            for (label, dist) in [("row-wise", &row), ("projective", &proj)] {
                let r = wrap(pcg_solve(&a, &b, None, &opts, dist))?;
                let res = relative_residual(&a, &r.x, &b)?;
                let diff: Vec<f64> = r.x.iter().zip(&seq.x).map(|(u, v)| u - v).collect();
                let dx = norm(&diff) / scale;
                worst = worst.max(res).max(dx);
                ensure(r.converged && res <= 1e-7, format!("{name} {label} n={n}: residual {res:.2e}"))?;
                ensure(dx <= 1e-7, format!("{name} {label} n={n}: differs from sequential by {dx:.2e}"))?;
                ensure(
                    r.iterations == seq.iterations,
                    format!("{name} {label} n={n}: {} iterations vs {}", r.iterations, seq.iterations),
                )?;
                ensure(r.log.is_conserved(), format!("{name} {label}: messages not conserved"))?;
            }
            let limit = 2 * (p + 1);
            let m_proj = messages_per_product(&proj, &a)?;
            ensure(m_proj <= limit, format!("{name} n={n}: projective {m_proj} messages > {limit}"))?;
        }
        notes.push(format!("{name}:{}", seq.iterations));
    }

    // dense block pattern: every process needs every input block
    let dense = wrap(MatrixGenerator::DiagDom { n: 39, density: 1.0, seed: 5 }.generate())?;
    for p in [2u64, 3] {
        let proj = wrap(projective_distribution(p))?;
        let n = proj.n();
        let m_row = messages_per_product(&wrap(rowwise_distribution(n))?, &dense)?;
        let m_proj = messages_per_product(&proj, &dense)?;
        ensure(m_row == n as u64 - 1, format!("dense n={n}: row-wise {m_row} messages"))?;
        ensure(m_proj <= 2 * (p + 1), format!("dense n={n}: projective {m_proj} messages"))?;
        notes.push(format!("dense n={n}: {m_row} vs {m_proj}"));
    }
    Ok(format!("iterations {}; worst error {worst:.1e}", notes.join(", ")))
}

fn random_tile(rng: &mut ChaCha8Rng) -> CsrMatrix {
    let rows = rng.random_range(1..=12);
    let cols = rng.random_range(1..=12);
    let density = rng.random_range(0.0..0.6);
    let mut t = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            if rng.random_bool(density) {
                t.push((i, j, rng.random_range(-1.0..1.0)));
            }
        }
    }
    CsrMatrix::from_triplets(rows, cols, &t).expect("valid tile")
}

fn packing() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..1000 {
        let t = random_tile(&mut rng);
        let back = wrap(wrap(pack_block((0, 0), &t))?.unpack())?;
        ensure(back == t, format!("tile {k} does not round-trip"))?;
    }
    let volume = |a: &CsrMatrix, dist: &DistributionMap, packing: bool| -> Result<u64, String> {
        let blocked = wrap(tile_matrix(a, dist.n() as usize))?;
        let plan = wrap(SpmvPlan::new(dist, &blocked, packing))?;
        let x = wrap(pgcomp_core::BlockedVector::split(blocked.partition(), &vec![1.0; a.nrows()]))?;
        Ok(wrap(plan.execute(&x))?.1.vector_volume())
    };
    let mut notes = Vec::new();
    let dist = wrap(projective_distribution(3))?;
    for (name, a) in wrap(test_matrices())? {
        let (with, without) = (volume(&a, &dist, true)?, volume(&a, &dist, false)?);
        ensure(with < without, format!("{name}: packed {with} vs {without}"))?;
        notes.push(format!("{name} {with}/{without}"));
    }
    let dense = wrap(MatrixGenerator::DiagDom { n: 39, density: 1.0, seed: 5 }.generate())?;
    let (with, without) = (volume(&dense, &dist, true)?, volume(&dense, &dist, false)?);
    ensure(with == without, format!("dense: packed {with} vs {without}"))?;
    notes.push(format!("dense {with}/{without}"));
    Ok(format!("1000 tiles round-trip; volumes {}", notes.join(", ")))
}

fn matchings() -> Check {
    let t = Instant::now();
    let s = wrap(ProjectiveSpace::with_order(4, 2, &[1, 2]))?;
    let ms = wrap(standard_matchings(&s))?;
    ensure(ms.len() == 7, format!("{} matchings", ms.len()))?;
    let planes = wrap(s.planes())?;
    let lines = wrap(s.lines())?;
    for m in &ms {
        let image: BTreeSet<usize> = (0..155).map(|p| m.line_of_plane(p)).collect();
        ensure(image.len() == 155, format!("S{} is not a bijection", m.q()))?;
    }
    for (pid, plane) in planes.iter().enumerate() {
        let got: BTreeSet<usize> = ms.iter().map(|m| m.line_of_plane(pid)).collect();
        let want: BTreeSet<usize> = wrap(s.lines_in(plane))?
            .iter()
            .map(|l| s.id_of(l))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        ensure(got == want, format!("plane {pid}: matched lines differ from its lines"))?;
    }
    let group = all_automorphisms(&s);
    ensure(group.len() == 155, format!("{} automorphisms", group.len()))?;
    for m in &ms {
        for g in &group {
            for (pid, plane) in planes.iter().enumerate() {
                let moved = wrap(s.id_of(&g.apply(&s, plane)))?;
                let line = &lines[m.line_of_plane(pid)];
                let expect = wrap(s.id_of(&g.apply(&s, line)))?;
                ensure(
                    m.line_of_plane(moved) == expect,
                    format!("S{} not equivariant under {g:?}", m.q()),
                )?;
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 5.0, format!("took {secs:.2} s"))?;
    Ok(format!("7 bijections, 155 planes covered, 155 automorphisms in {secs:.2} s"))
}

fn lu_scheme_two() -> Check {
    let mut notes = Vec::new();
    for b in [24usize, 12, 8] {
        let problem = wrap(BlockLUProblem::diag_dominant(744, b, 744 + b as u64))?;
        let run = wrap(run_scheme(Scheme::Pg2, &problem))?;
        ensure(run.factor_error <= 1e-10, format!("b={b}: factor error {:.2e}", run.factor_error))?;
        let s = wrap(build_schedule(Scheme::Pg2, problem.blocks()))?;
        let nb = problem.blocks();
        let mut full = 0;
        for i in 0..nb {
            if nb - i - 1 < 30 {
                continue;
            }
            full += 1;
            for phase in [Phase::TrailMul, Phase::TrailSub] {
                let busy = s.engaged(i as u32, phase).len();
                ensure(busy == 155, format!("b={b} iteration {i} {phase:?}: {busy} processors"))?;
            }
        }
        notes.push(format!("b={b}: err {:.1e}, {full} full phases", run.factor_error));
    }
    Ok(format!("0 violations; {}", notes.join(", ")))
}

/// `(b, [comp, comm, sub] cycles, [comp, comm, sub] times)` per reference row.
const TABLE: [(usize, [usize; 3], [f64; 3]); 8] = [
    (62, [69, 221, 11], [1189.56, 61.35, 3.05]),
    (31, [196, 583, 56], [422.38, 40.46, 3.89]),
    (24, [856, 2241, 651], [856.00, 93.23, 27.08]),
    (12, [5023, 12635, 4427], [627.88, 131.40, 46.04]),
    (8, [15291, 37981, 14118], [565.77, 175.47, 65.23]),
    (24, [393, 846, 188], [393.00, 35.19, 7.82]),
    (12, [1693, 2994, 1097], [211.63, 31.14, 11.41]),
    (8, [4458, 6444, 3285], [164.95, 29.77, 15.18]),
];

fn table_reconciliation() -> Check {
    let orders = [3, 2, 2];
    let mut worst: f64 = 0.0;
    for (b, cycles, times) in TABLE {
        for c in 0..3 {
            let t = normalized_time(cycles[c], b, orders[c]);
            let rel = (t - times[c]).abs() / times[c];
            worst = worst.max(rel);
            ensure(rel <= 0.01, format!("b={b} cycles {}: {t:.2} vs {}", cycles[c], times[c]))?;
        }
    }
    let cats = [Category::CompB3, Category::CommB2, Category::CompB2];
    let mut notes = vec![format!("18 times within {:.2}%", worst * 100.0)];
    let mut pg2_util = Vec::new();
    for (row, b) in [(5, 24usize), (6, 12), (7, 8)] {
        let nb = 744 / b;
        let pg2 = wrap(build_schedule(Scheme::Pg2, nb))?;
        let pg1 = wrap(build_schedule(Scheme::Pg1, nb))?;
        let ours = pg2.totals();
        let want = TABLE[row].1;
        for (k, c) in cats.iter().enumerate() {
            let got = ours[c.index()] as f64;
            let dev = (got - want[k] as f64).abs() / want[k] as f64;
            ensure(dev <= 0.15, format!("PG-2 b={b} {c:?}: {got} vs {}", want[k]))?;
        }
        let (c2, c1) = (ours[Category::CommB2.index()], pg1.totals()[Category::CommB2.index()]);
        ensure(c2 < c1, format!("b={b}: PG-2 comm {c2} not below PG-1 comm {c1}"))?;
        let log = CycleLog::from_schedule(&pg2);
        pg2_util.push((b, log.utilization(Category::CompB3), log.overall_utilization()));
        notes.push(format!(
            "b={b} PG-2 {}/{}/{} PG-1 comm {c1}",
            ours[0], ours[1], ours[2]
        ));
    }
    for b in [62usize, 31] {
        let log = CycleLog::from_schedule(&wrap(build_schedule(Scheme::Mesh { q: 12 }, 744 / b))?);
        let mesh = log.utilization(Category::CompB3);
        for &(pb, u, _) in &pg2_util {
            ensure(u > mesh, format!("PG-2 b={pb} utilization {u:.3} not above mesh b={b} {mesh:.3}"))?;
        }
        notes.push(format!("mesh b={b} util {mesh:.3} (overall {:.3})", log.overall_utilization()));
    }
    for (b, u, overall) in pg2_util {
        notes.push(format!("PG-2 b={b} util {u:.3} (overall {overall:.3})"));
    }
    Ok(notes.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("geometry counts", geometry_counts),
        ("Fano plane", fano_plane),
        ("p=3 connection table", connection_table),
        ("p=3 projective distribution", projective_p3),
        ("communication optimality", communication_optimality),
        ("SpMV/PCG correctness", spmv_pcg),
        ("packing", packing),
        ("matching patterns", matchings),
        ("LU bus schedule", lu_scheme_two),
        ("cycle table reconciliation", table_reconciliation),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {why}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
