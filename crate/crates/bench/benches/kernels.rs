use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use lattice_cover::body::Body;
use lattice_cover::covering::{cover_affine, cover_linear};
use lattice_cover::enumerate::enumerate_points;
use lattice_cover::lattice::LatticeBasis;
use lattice_cover::minima::{reduce_basis, successive_minima};
use lattice_cover::oracle::{min_cover_exact, CoverInstance, FlatKind};
use lattice_cover::rational::rat;

fn bench_enumeration(c: &mut Criterion) {
    let mut g = c.benchmark_group("enumerate");
    for (d, n) in [(2usize, 16i64), (3, 6), (4, 3)] {
        let lattice = LatticeBasis::standard(d);
        let body = Body::ball(rat(n)).unwrap();
        g.bench_function(format!("grid_ball_d{d}_n{n}"), |b| {
            b.iter(|| enumerate_points(black_box(&lattice), black_box(&body)).unwrap())
        });
    }
    g.finish();
}

fn bench_minima(c: &mut Criterion) {
    let mut g = c.benchmark_group("minima");
    let skew = LatticeBasis::from_integer_rows(&[
        vec![3, 1, 0, 0],
        vec![1, 2, 1, 0],
        vec![0, 1, 3, 1],
        vec![1, 0, 1, 2],
    ])
    .unwrap();
    let body = Body::ball(rat(6)).unwrap();
    g.bench_function("skew_d4", |b| {
        b.iter(|| successive_minima(black_box(&skew), black_box(&body)).unwrap())
    });
    g.bench_function("reduce_basis_d4", |b| {
        b.iter(|| reduce_basis(black_box(&skew), black_box(&body)).unwrap())
    });
    g.finish();
}

fn bench_covering(c: &mut Criterion) {
    let mut g = c.benchmark_group("cover");
    g.sample_size(20);
    let z2 = LatticeBasis::standard(2);
    let ball8 = Body::ball(rat(8)).unwrap();
    g.bench_function("linear_d2_n8", |b| {
        b.iter(|| cover_linear(black_box(&z2), black_box(&ball8), 1).unwrap())
    });
    g.bench_function("affine_d2_n8", |b| {
        b.iter(|| cover_affine(black_box(&z2), black_box(&ball8), 1).unwrap())
    });
    let z3 = LatticeBasis::standard(3);
    let ball2 = Body::ball(rat(2)).unwrap();
    g.bench_function("hyperplanes_d3_n2", |b| {
        b.iter(|| cover_linear(black_box(&z3), black_box(&ball2), 2).unwrap())
    });
    g.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle");
    g.sample_size(20);
    g.bench_function("min_cover_d2_n3_linear", |b| {
        b.iter_batched(
            || CoverInstance::grid_ball(3, 2, 1, FlatKind::Linear).unwrap(),
            |inst| min_cover_exact(black_box(&inst)).unwrap(),
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

criterion_group!(benches, bench_enumeration, bench_minima, bench_covering, bench_oracle);
criterion_main!(benches);
