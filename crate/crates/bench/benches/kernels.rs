use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use polywell_core::{
    certify, minimize_dirichlet_from, random_rotation, sample_rank_one, CertifyOptions, Decomposition,
    DoubleWell, Matrix, Mesh2, SolveOptions, VectorField,
};

fn wells(n: usize) -> DoubleWell {
    let r = random_rotation(n, 7);
    DoubleWell::new(
        &r.scale(1.5) + &Matrix::identity(n),
        &r.scale(-1.5) + &Matrix::identity(n),
    )
    .unwrap()
}

fn bench_svd(c: &mut Criterion) {
    let mut group = c.benchmark_group("svd");
    for n in [2, 3, 4, 6] {
        let x = random_rotation(n, 1)
            .matmul(&Matrix::diag(&(1..=n).map(|k| k as f64).collect::<Vec<_>>()).unwrap());
        group.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| black_box(x).svd().unwrap())
        });
    }
    group.finish();
}

fn bench_certify(c: &mut Criterion) {
    let mut group = c.benchmark_group("certify");
    for n in [2, 3, 6] {
        let dw = wells(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &dw, |b, dw| {
            b.iter(|| certify(black_box(dw), &CertifyOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn bench_decomposition(c: &mut Criterion) {
    let dw = wells(3);
    let dec = Decomposition::build(&certify(&dw, &CertifyOptions::default()).unwrap()).unwrap();
    let x = Matrix::from_rows(&[[0.3, -1.0, 2.0], [0.5, 0.1, -0.7], [1.1, 0.0, 0.4]]).unwrap();
    c.bench_function("eval_convex_3x3", |b| {
        b.iter(|| dec.eval_convex(black_box(&x)).unwrap())
    });
    c.bench_function("convex_gradient_3x3", |b| {
        b.iter(|| dec.convex_gradient(black_box(&x)).unwrap())
    });
}

fn bench_sampling(c: &mut Criterion) {
    let dw = wells(3);
    c.bench_function("sample_rank_one_10k", |b| {
        b.iter(|| sample_rank_one(&dw, 10_000, 0).unwrap())
    });
}

fn bench_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("dirichlet_solve");
    group.sample_size(10);
    let dw = DoubleWell::plus_minus_identity(2);
    for m in [4, 8] {
        let mesh = Mesh2::unit_square(m).unwrap();
        let y0 = VectorField::interpolate(&mesh, |p| p);
        let start = polywell_core::minimize::random_start(&mesh, &y0, 0, 0);
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| {
            b.iter(|| minimize_dirichlet_from(&dw, &mesh, &y0, &start, &SolveOptions::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_svd,
    bench_certify,
    bench_decomposition,
    bench_sampling,
    bench_solve
);
criterion_main!(benches);
