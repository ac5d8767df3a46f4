use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use faer::{c64, Mat};

use ghzsim_core::catalog::{build_error_channels, build_scheme, RateName, RateSet, Scheme, SchemeId};
use ghzsim_core::solver::SolverConfig;
use ghzsim_core::tuner::{grid_search, LogAxis, Objective};
use ghzsim_core::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn rates() -> RateSet {
    RateSet { kappa_u: 1.0, kappa_d: 10.0, kappa_t: 1.0, kappa_st: 100.0, kappa_r: 100.0, kappa_c: 30.0, kappa_p: 0.02, ..Default::default() }
}

fn lindbladian_action(c: &mut Criterion) {
    let mut group = c.benchmark_group("lindbladian_apply");
    for n in [3, 4] {
        let r = rates();
        let spec = build_scheme(SchemeId::plain(Scheme::QutritWave), n, &r, None).unwrap();
        let errors = build_error_channels(&spec.layout, &r, Scheme::QutritWave.default_error_model()).unwrap();
        let handle = spec.lindbladian(&errors).unwrap();
        let d = handle.dim();
        let rho = Mat::from_fn(d, d, |i, j| if i == j { c64::new(1.0 / d as f64, 0.0) } else { c64::new(0.0, 0.0) });
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| b.iter(|| handle.apply_with(rho.as_ref(), exec).unwrap()));
        }
    }
    group.finish();
}

fn grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("grid_search");
    group.sample_size(10);
    let fixed = RateSet { kappa_st: 1e4, kappa_c: 1e4, kappa_p: 1.0, ..Default::default() };
    let axes = [LogAxis::new(RateName::KappaU, 10.0, 1000.0).with_points(16)];
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| grid_search(Scheme::QutritWave, 2, &fixed, &axes, Objective::FullSolve, &SolverConfig::default(), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, lindbladian_action, grid);
criterion_main!(benches);
