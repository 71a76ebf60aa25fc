use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use pgcomp_core::{projective_distribution, rowwise_distribution, tile_matrix, BlockedVector, MatrixGenerator, SpmvPlan};

fn spmv(c: &mut Criterion) {
    let a = "poisson2d:60".parse::<MatrixGenerator>().unwrap().generate().unwrap();
    let x = vec![1.0; a.nrows()];
    let mut group = c.benchmark_group("spmv_poisson2d_60");
    for (name, dist) in [
        ("rowwise", rowwise_distribution(13).unwrap()),
        ("projective", projective_distribution(3).unwrap()),
    ] {
        let tiled = tile_matrix(&a, dist.n() as usize).unwrap();
        for packing in [false, true] {
            let plan = SpmvPlan::new(&dist, &tiled, packing).unwrap();
            let xb = BlockedVector::split(plan.partition(), &x).unwrap();
            let id = BenchmarkId::new(name, if packing { "packed" } else { "plain" });
            group.bench_with_input(id, &xb, |b, xb| b.iter(|| black_box(plan.execute(xb).unwrap())));
        }
    }
    group.finish();
}

criterion_group!(benches, spmv);
criterion_main!(benches);
