//! Subcommand bodies. Each builds a result, a CSV table, and hands both to
//! [`emit`].

use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use pgcomp_core::distribution::{
    comm_profile, integer_lower_bound, random_weak_cartesian, validate_weak_cartesian, Block, CommProfile,
    WeakCartesianReport,
};
use pgcomp_core::lu::Category;
use pgcomp_core::mtx::read_matrix_market_file;
use pgcomp_core::spmv::MessageLog;
use pgcomp_core::{
    projective_distribution, rowwise_distribution, run_scheme, standard_matchings, tile_matrix, BlockLUProblem,
    BlockedVector, CsrMatrix, DistributionMap, LuRun, MatrixGenerator, PcgOptions, ProjectiveSpace, Scheme, SpmvPlan,
};

use crate::args::{DistKind, SchemeKind};
use crate::config::{DistSpec, ExperimentConfig, MatrixSource, Outputs};
use crate::error::{CliError, Result};
use crate::report::{emit, write_file, Table};

pub fn run(cfg: &ExperimentConfig, out: &Outputs) -> Result<()> {
    match cfg {
        ExperimentConfig::Geometry { d, q, matchings } => geometry(cfg, out, *d, *q, *matchings),
        ExperimentConfig::Distribute { dist } => distribute(cfg, out, dist),
        ExperimentConfig::Pcg {
            matrix,
            dist,
            eps,
            imax,
            packing,
        } => pcg(
            cfg,
            out,
            matrix,
            dist,
            PcgOptions {
                i_max: *imax,
                eps: *eps,
                packing: *packing,
            },
        ),
        ExperimentConfig::SpmvBench { matrix, p, repeat, .. } => spmv_bench(cfg, out, matrix, *p, *repeat),
        ExperimentConfig::LuSim {
            scheme,
            n,
            block,
            q,
            seed,
        } => lu_sim(cfg, out, *scheme, *n, *block, *q, *seed),
    }
}

#[derive(Serialize)]
struct Counts {
    points: usize,
    lines: usize,
    planes: usize,
}

#[derive(Serialize)]
struct FieldInfo {
    p: u32,
    k: u32,
    /// Coefficients of the primitive polynomial of the extension field,
    /// constant term first.
    polynomial: Vec<u32>,
}

#[derive(Serialize)]
struct Point {
    id: u32,
    /// Coordinates over the prime field, lowest power first.
    coords: Vec<u32>,
}

#[derive(Serialize)]
struct Matching {
    q: u32,
    /// `(plane id, line id)` pairs.
    pairs: Vec<(usize, usize)>,
}

#[derive(Serialize)]
struct GeometryResult {
    field: FieldInfo,
    counts: Counts,
    points: Vec<Point>,
    lines: Vec<Vec<u32>>,
    planes: Vec<Vec<u32>>,
    incidences: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    matchings: Option<Vec<Matching>>,
}

fn geometry(cfg: &ExperimentConfig, out: &Outputs, d: u32, q: u64, matchings: bool) -> Result<()> {
    let dims: Vec<u32> = [1, 2].into_iter().filter(|&l| l <= d).collect();
    let space = ProjectiveSpace::with_order(d, q, &dims)?;
    let lines = space.lines()?;
    let planes = if d >= 2 { space.planes()? } else { &[] };
    let mut edges = Vec::new();
    for (pid, plane) in planes.iter().enumerate() {
        for l in space.lines_in(plane)? {
            edges.push((space.id_of(&l)?, pid));
        }
    }
    edges.sort_unstable();
    let field = space.field();
    let result = GeometryResult {
        field: FieldInfo {
            p: field.characteristic(),
            k: field.degree(),
            polynomial: field.spec().prim_poly().to_vec(),
        },
        counts: Counts {
            points: space.point_count() as usize,
            lines: lines.len(),
            planes: planes.len(),
        },
        points: (0..space.point_count())
            .map(|i| Point {
                id: i,
                coords: field.coeffs(space.vector_of(i)),
            })
            .collect(),
        lines: lines.iter().map(|l| l.points().to_vec()).collect(),
        planes: planes.iter().map(|p| p.points().to_vec()).collect(),
        incidences: edges.len(),
        matchings: if matchings {
            Some(
                standard_matchings(&space)?
                    .iter()
                    .map(|m| Matching {
                        q: m.q(),
                        pairs: (0..planes.len()).map(|p| (p, m.line_of_plane(p))).collect(),
                    })
                    .collect(),
            )
        } else {
            None
        },
    };
    if let Some(path) = &out.edges {
        let text: String = edges.iter().map(|(l, p)| format!("{l} {p}\n")).collect();
        write_file(path, &text)?;
    }
    let mut table = Table::new(["line", "plane"]);
    for (l, p) in &edges {
        table.push([l, p]);
    }
    emit(cfg, out, &result, &table)
}

fn build_distribution(spec: &DistSpec) -> Result<DistributionMap> {
    Ok(match spec.kind {
        DistKind::Projective => projective_distribution(spec.p.unwrap_or(3))?,
        DistKind::Rowwise => rowwise_distribution(spec.processes)?,
        DistKind::Random => random_weak_cartesian(spec.processes, spec.seed.unwrap_or(1))?,
    })
}

#[derive(Serialize)]
struct DistributeResult {
    processes: u32,
    owners: Vec<Vec<u32>>,
    blocks: Vec<Vec<Block>>,
    weak_cartesian: WeakCartesianReport,
    communication: CommProfile,
    /// `min over r of r + ceil(n / r)`.
    integer_lower_bound: u32,
}

fn distribute(cfg: &ExperimentConfig, out: &Outputs, spec: &DistSpec) -> Result<()> {
    let map = build_distribution(spec)?;
    let n = map.n();
    let owners = map.owner_matrix();
    let mut table = Table::new(std::iter::once("row".to_string()).chain((0..n).map(|j| j.to_string())));
    for (i, row) in owners.iter().enumerate() {
        table.push(std::iter::once(i as u32).chain(row.iter().copied()));
    }
    let result = DistributeResult {
        processes: n,
        blocks: (0..n).map(|p| map.blocks_of(p).to_vec()).collect(),
        owners,
        weak_cartesian: validate_weak_cartesian(&map),
        communication: comm_profile(&map),
        integer_lower_bound: integer_lower_bound(n),
    };
    emit(cfg, out, &result, &table)
}

fn load_matrix(src: &MatrixSource) -> Result<CsrMatrix> {
    match src {
        MatrixSource::File { path } => read_matrix_market_file(Path::new(path)).map_err(|e| CliError::Input {
            name: path.clone(),
            msg: e.to_string(),
        }),
        MatrixSource::Generator { spec } => Ok(spec.parse::<MatrixGenerator>()?.generate()?),
    }
}

#[derive(Serialize)]
struct MatrixInfo {
    rows: usize,
    nnz: usize,
}

#[derive(Serialize)]
struct PcgReport {
    matrix: MatrixInfo,
    processes: u32,
    iterations: usize,
    converged: bool,
    spmv_count: usize,
    /// Preconditioned residual `rᵀ M⁻¹ r` per iteration, starting value first.
    residual_history: Vec<f64>,
    /// `‖b − A x‖ / ‖b‖` recomputed sequentially.
    relative_residual: f64,
    /// Largest `|x_i − 1|`; the right-hand side is `A·1`.
    max_error: f64,
    /// Vector-block messages per process in one product.
    messages_per_spmv: Vec<u64>,
    traffic: MessageLog,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn pcg(cfg: &ExperimentConfig, out: &Outputs, src: &MatrixSource, spec: &DistSpec, opts: PcgOptions) -> Result<()> {
    let a = load_matrix(src)?;
    if !a.is_square() || !a.is_symmetric() {
        return Err(CliError::invalid("conjugate gradient needs a square symmetric matrix"));
    }
    let dist = build_distribution(spec)?;
    let ones = vec![1.0; a.nrows()];
    let b = a.matvec(&ones)?;
    let r = pgcomp_core::pcg_solve(&a, &b, None, &opts, &dist)?;
    let ax = a.matvec(&r.x)?;
    let res: Vec<f64> = b.iter().zip(&ax).map(|(u, v)| u - v).collect();
    let spmvs = r.spmv_count.max(1) as u64;
    let report = PcgReport {
        matrix: MatrixInfo {
            rows: a.nrows(),
            nnz: a.nnz(),
        },
        processes: dist.n(),
        iterations: r.iterations,
        converged: r.converged,
        spmv_count: r.spmv_count,
        residual_history: r.residual_history.clone(),
        relative_residual: norm(&res) / norm(&b).max(f64::MIN_POSITIVE),
        max_error: r.x.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max),
        messages_per_spmv: r.log.processes.iter().map(|p| p.block_messages() / spmvs).collect(),
        traffic: r.log.clone(),
    };
    let mut table = Table::new([
        "process",
        "gather_received_messages",
        "gather_received_elements",
        "partial_sent_messages",
        "partial_sent_elements",
        "scalar_sent_messages",
        "messages_per_spmv",
    ]);
    for (p, m) in r.log.processes.iter().zip(&report.messages_per_spmv) {
        table.push([
            p.process as u64,
            p.gather_received.messages,
            p.gather_received.elements,
            p.partial_sent.messages,
            p.partial_sent.elements,
            p.scalar_sent.messages,
            *m,
        ]);
    }
    emit(cfg, out, &report, &table)?;
    if r.converged {
        Ok(())
    } else {
        Err(CliError::NotConverged(r.iterations))
    }
}

#[derive(Serialize)]
struct BenchRow {
    distribution: DistKind,
    packing: bool,
    max_messages: u64,
    total_messages: u64,
    vector_volume: u64,
    /// Largest relative deviation from the sequential product.
    max_error: f64,
}

#[derive(Serialize)]
struct BenchResult {
    matrix: MatrixInfo,
    processes: u32,
    rows: Vec<BenchRow>,
}

fn spmv_bench(cfg: &ExperimentConfig, out: &Outputs, src: &MatrixSource, p: u64, repeat: usize) -> Result<()> {
    let a = load_matrix(src)?;
    if !a.is_square() {
        return Err(CliError::invalid("spmv-bench needs a square matrix"));
    }
    let proj = projective_distribution(p)?;
    let n = proj.n();
    let blocked = tile_matrix(&a, n as usize)?;
    let x: Vec<f64> = (0..a.nrows()).map(|i| 1.0 / (i + 1) as f64).collect();
    let want = a.matvec(&x)?;
    let xb = BlockedVector::split(blocked.partition(), &x)?;
    let mut rows = Vec::new();
    for (kind, dist) in [(DistKind::Rowwise, rowwise_distribution(n)?), (DistKind::Projective, proj)] {
        for packing in [false, true] {
            let plan = SpmvPlan::new(&dist, &blocked, packing)?;
            let (y, log) = plan.execute(&xb)?;
            let max_error = y
                .join()
                .iter()
                .zip(&want)
                .map(|(u, v)| (u - v).abs() / v.abs().max(1.0))
                .fold(0.0, f64::max);
            if max_error > 1e-12 {
                return Err(CliError::Invariant(format!(
                    "{kind:?} product deviates from the sequential one by {max_error:e}"
                )));
            }
            let t = Instant::now();
            for _ in 0..repeat {
                plan.execute(&xb)?;
            }
            let per = t.elapsed().as_secs_f64() / repeat as f64;
            eprintln!("{kind:?} packing={packing}: {:.1} us per product", per * 1e6);
            let counts: Vec<u64> = log.processes.iter().map(|p| p.block_messages()).collect();
            rows.push(BenchRow {
                distribution: kind,
                packing,
                max_messages: counts.iter().copied().max().unwrap_or(0),
                total_messages: counts.iter().sum(),
                vector_volume: log.vector_volume(),
                max_error,
            });
        }
    }
    let mut table = Table::new([
        "distribution",
        "packing",
        "max_messages",
        "total_messages",
        "vector_volume",
        "max_error",
    ]);
    for r in &rows {
        let kind = match r.distribution {
            DistKind::Rowwise => "rowwise",
            _ => "projective",
        };
        table.push([
            kind.to_string(),
            r.packing.to_string(),
            r.max_messages.to_string(),
            r.total_messages.to_string(),
            r.vector_volume.to_string(),
            format!("{:e}", r.max_error),
        ]);
    }
    let result = BenchResult {
        matrix: MatrixInfo {
            rows: a.nrows(),
            nnz: a.nnz(),
        },
        processes: n,
        rows,
    };
    emit(cfg, out, &result, &table)
}

fn lu_sim(
    cfg: &ExperimentConfig,
    out: &Outputs,
    scheme: SchemeKind,
    n: usize,
    block: usize,
    q: Option<u32>,
    seed: u64,
) -> Result<()> {
    let scheme = match scheme {
        SchemeKind::Pg1 => Scheme::Pg1,
        SchemeKind::Pg2 => Scheme::Pg2,
        SchemeKind::Mesh => Scheme::Mesh { q: q.unwrap_or(12) },
    };
    let problem = BlockLUProblem::diag_dominant(n, block, seed)?;
    let run: LuRun = run_scheme(scheme, &problem)?;
    let mut table = Table::new([
        "category",
        "cycles",
        "normalized_time",
        "average_cycles",
        "max_processor_cycles",
        "utilization",
    ]);
    for c in Category::ALL {
        let r = run.category(c);
        let name = match c {
            Category::CompB3 => "comp_b3",
            Category::CommB2 => "comm_b2",
            Category::CompB2 => "comp_b2",
        };
        table.push([
            name.to_string(),
            r.cycles.to_string(),
            format!("{:.2}", r.normalized_time),
            format!("{:.2}", r.average_cycles),
            r.max_processor_cycles.to_string(),
            format!("{:.4}", r.utilization),
        ]);
    }
    emit(cfg, out, &run, &table)
}
