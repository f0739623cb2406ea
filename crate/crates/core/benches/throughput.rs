//! Data-parallel hot paths vs explicit sequential baselines. With the
//! default `parallel` feature the library maps ensembles, time series and
//! basis construction over rayon; the sequential baselines below drive the
//! same kernels one item at a time.
//!
//! Run with `cargo bench`, or `cargo bench --no-default-features` to measure
//! the fully sequential build.

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use pilotwave::eigen::compute_eigenstate;
use pilotwave::grid::{build_grid, GridMapping, RadialGrid};
use pilotwave::packet::{
    autocorrelation, build_basis, classical_period, gaussian_coefficients, CoefficientSet,
    PulseModel, SuperposedField, WeightMode,
};
use pilotwave::pilot::{sample_positions, Guidance, IntegratorConfig};
use pilotwave::trajectory::linspace;

fn grid() -> Arc<RadialGrid> {
    Arc::new(build_grid(8000.0, 24000, GridMapping::SqrtR).unwrap())
}

fn coeffs() -> CoefficientSet {
    gaussian_coefficients(40, 1.5, WeightMode::Uniform, 1).unwrap()
}

fn bench_basis(c: &mut Criterion) {
    let grid = grid();
    let cs = coeffs();
    let mut group = c.benchmark_group("basis_construction");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| build_basis(&cs, &grid).unwrap());
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            cs.ns()
                .map(|n| Arc::new(compute_eigenstate(n, cs.l(), &grid).unwrap()))
                .collect::<Vec<_>>()
        });
    });
    group.finish();
}

fn bench_autocorrelation(c: &mut Criterion) {
    let cs = coeffs();
    let t_cl = classical_period(40);
    let times = linspace(0.0, 15.0 * t_cl, 20001);
    let mut group = c.benchmark_group("autocorrelation_20k_times");
    group.bench_function("parallel", |b| {
        b.iter(|| autocorrelation(&cs, &times));
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            times
                .iter()
                .map(|&t| autocorrelation(&cs, &[t])[0])
                .collect::<Vec<_>>()
        });
    });
    group.finish();
}

fn bench_ensemble(c: &mut Criterion) {
    let grid = grid();
    let cs = coeffs();
    let basis = build_basis(&cs, &grid).unwrap();
    let field = SuperposedField::new(cs, &basis, PulseModel::PostPulse).unwrap();
    let t_cl = classical_period(40);
    let horizon = t_cl / 16.0;
    let guidance = Guidance::new(&field, IntegratorConfig::default(), 0.0, horizon).unwrap();
    let snap = field.snapshot(0.0);
    let positions = sample_positions(&snap, 32, 7).unwrap();
    let sample_times = linspace(0.0, horizon, 9);

    let mut group = c.benchmark_group("ensemble_32_members");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter_batched(
            || positions.clone(),
            |pos| {
                guidance
                    .run_ensemble(&pos, 0.0, horizon, &sample_times)
                    .unwrap()
            },
            BatchSize::SmallInput,
        );
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            positions
                .iter()
                .map(|&r0| guidance.integrate(r0, 0.0, horizon, &sample_times).unwrap())
                .collect::<Vec<_>>()
        });
    });
    group.finish();
}

criterion_group!(benches, bench_basis, bench_autocorrelation, bench_ensemble);
criterion_main!(benches);
