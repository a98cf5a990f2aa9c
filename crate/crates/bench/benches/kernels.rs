//! Benchmarks for the hot paths: kernel evaluation, Fredholm
//! determinants, the conditioned-kernel solve, recurrence construction,
//! and the equilibrium solver.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use detform_core::*;
use std::hint::black_box;
use std::sync::Arc;

fn bench_airy(c: &mut Criterion) {
    c.bench_function("airy_ai series x=3", |b| {
        b.iter(|| airy_ai(black_box(3.0)).unwrap())
    });
    c.bench_function("airy_ai laplace x=9", |b| {
        b.iter(|| airy_ai(black_box(9.0)).unwrap())
    });
}

fn bench_cd_kernel(c: &mut Criterion) {
    let mut group = c.benchmark_group("cd_kernel");
    for n in [10usize, 40, 80] {
        let sys = BiorthogonalSystem::build(&Potential::quadratic(), n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| orthopoly::cd_kernel(&sys, black_box(0.31), black_box(-0.17)))
        });
    }
    group.finish();
}

fn bench_stieltjes(c: &mut Criterion) {
    let mut group = c.benchmark_group("stieltjes_build");
    group.sample_size(10);
    for n in [20usize, 80] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| BiorthogonalSystem::build(&Potential::quadratic(), n).unwrap())
        });
    }
    group.finish();
}

fn bench_fredholm(c: &mut Criterion) {
    let mut group = c.benchmark_group("fredholm_det");
    group.sample_size(20);
    for order in [120usize, 240] {
        let op = discretize(&KernelField::sine(), (-2.0, 2.0), order).unwrap();
        let psi = op.values_on_grid(|u| if u.abs() < 1.0 { 0.5 } else { 0.0 });
        group.bench_with_input(BenchmarkId::from_parameter(order), &order, |b, _| {
            b.iter(|| fredholm_det(black_box(&op), black_box(&psi)).unwrap())
        });
    }
    group.finish();
}

fn bench_deformed_kernel(c: &mut Criterion) {
    let mut group = c.benchmark_group("deformed_kernel");
    group.sample_size(20);
    let op = discretize(&KernelField::sine(), (-2.0, 2.0), 160).unwrap();
    let sig = op.values_on_grid(|u| 0.5 * (-u * u).exp());
    group.bench_function("sine-160", |b| {
        b.iter(|| deformed_kernel(black_box(&op), black_box(&sig)).unwrap())
    });
    group.finish();
}

fn bench_bulk_sweep_point(c: &mut Criterion) {
    let mut group = c.benchmark_group("bulk_functional");
    group.sample_size(10);
    let pot = Potential::quadratic();
    let kappa = pot.kappa(0.0).unwrap();
    let sys = Arc::new(BiorthogonalSystem::build(&pot, 40).unwrap());
    let field = rescaled_bulk_kernel(&sys, 0.0, kappa).unwrap();
    group.bench_function("n=40 discretize+ratio", |b| {
        b.iter(|| {
            let op = discretize(&field, (-1.5, 1.5), 90).unwrap();
            let sig = op.values_on_grid(|u| if u.abs() < 1.0 { 0.5 } else { 0.0 });
            let h = op.values_on_grid(|u| if u.abs() < 0.5 { 0.4 } else { 0.0 });
            pgf_deformed(&op, &sig, &h, PgfRoute::Ratio).unwrap().value
        })
    });
    group.finish();
}

fn bench_equilibrium(c: &mut Criterion) {
    let mut group = c.benchmark_group("equilibrium");
    group.sample_size(10);
    let grid: Vec<f64> = (0..800).map(|i| -2.4 + 4.8 * i as f64 / 799.0).collect();
    group.bench_function("semicircle-800", |b| {
        b.iter(|| equilibrium::equilibrium_density_numeric(&Potential::quadratic(), &grid).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_airy,
    bench_cd_kernel,
    bench_stieltjes,
    bench_fredholm,
    bench_deformed_kernel,
    bench_bulk_sweep_point,
    bench_equilibrium
);
criterion_main!(benches);
