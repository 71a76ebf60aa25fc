use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use pgcomp_core::{GaloisField, ProjectiveSpace};

fn field_ops(c: &mut Criterion) {
    let f = GaloisField::with_order(2, 5).unwrap();
    let elems = f.elements();
    c.bench_function("gf32_mul_all_pairs", |b| {
        b.iter(|| {
            let mut acc = f.zero();
            for &x in &elems {
                for &y in &elems {
                    acc = f.add(acc, f.mul(x, y));
                }
            }
            black_box(acc)
        })
    });
}

fn geometry(c: &mut Criterion) {
    c.bench_function("pg4_2_lines_and_planes", |b| {
        b.iter(|| {
            let s = ProjectiveSpace::with_order(4, 2, &[1, 2]).unwrap();
            black_box((s.lines().unwrap().len(), s.planes().unwrap().len()))
        })
    });
}

criterion_group!(benches, field_ops, geometry);
criterion_main!(benches);
