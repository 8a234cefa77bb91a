//! Grid kernels under the active execution mode.
//!
//! Compare `cargo bench -p pshma-core` against
//! `cargo bench -p pshma-core --no-default-features`; group names carry the mode.

use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pshma_core::solver::{manufacture, residual, Evaluator};
use pshma_core::verifier::check_correspondence;
use pshma_core::{MatrixField, Metric, ScalarField, Spectral, TorusGrid};

const MODE: &str = if cfg!(feature = "parallel") { "parallel" } else { "sequential" };

fn bump(grid: TorusGrid) -> ScalarField {
    ScalarField::from_fn(grid, |x| {
        0.04 * (2.0 * PI * x[0]).cos() * (2.0 * PI * x[2]).cos() + 0.01 * (2.0 * PI * x[1]).sin()
    })
}

fn hessian(c: &mut Criterion) {
    let mut group = c.benchmark_group(format!("hessian/{MODE}"));
    for samples in [16, 32] {
        let grid = TorusGrid::full(2, samples).unwrap();
        let spectral = Spectral::new(grid);
        let u = bump(grid);
        group.bench_with_input(BenchmarkId::from_parameter(samples), &u, |b, u| {
            b.iter(|| spectral.hessian(black_box(u)).unwrap())
        });
    }
    group.finish();
}

fn residual_eval(c: &mut Criterion) {
    let mut group = c.benchmark_group(format!("residual/{MODE}"));
    for samples in [16, 32] {
        let grid = TorusGrid::full(2, samples).unwrap();
        let g = Metric::identity(2);
        let h = MatrixField::constant(grid, g.matrix()).unwrap();
        let u = bump(grid);
        let spec = manufacture(&g, &h, &u).unwrap();
        let evaluator = Evaluator::new(&spec);
        group.bench_with_input(BenchmarkId::new("evaluate", samples), &u, |b, u| {
            b.iter(|| evaluator.evaluate(black_box(u), 0.0, 1.0).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("residual", samples), &u, |b, u| {
            b.iter(|| residual(&spec, black_box(u), 0.0, 1.0).unwrap())
        });
    }
    group.finish();
}

fn identities(c: &mut Criterion) {
    let mut group = c.benchmark_group(format!("identities/{MODE}"));
    group.sample_size(20);
    for n in [3, 4] {
        group.bench_with_input(BenchmarkId::new("correspondence", n), &n, |b, &n| {
            b.iter(|| check_correspondence(n, 200, 7))
        });
    }
    group.finish();
}

criterion_group!(benches, hessian, residual_eval, identities);
criterion_main!(benches);
