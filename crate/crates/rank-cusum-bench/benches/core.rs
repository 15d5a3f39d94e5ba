//! Benchmarks of the hot paths: concordance counting, the sequential tau
//! path, the joint ECDF, the variance estimator, and a full test run.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rank_cusum::{
    generate, joint_ecdf_at_sample, kendall_change_test, kendall_path, kendall_tau,
    lrv_estimate_slice, psi_hat, BivariateSeries, Family, InnovationSpec, LrvConfig, ScenarioSpec,
};

fn series(n: usize, seed: u64) -> BivariateSeries {
    let innovation = InnovationSpec {
        family: Family::Normal,
        rho: 0.4,
    };
    let spec = ScenarioSpec {
        first: innovation,
        second: innovation,
        phi: 0.0,
        n,
        change_fraction: 0.5,
        burn_in: 0,
        seed,
    };
    generate(&spec).unwrap()
}

fn bench_kendall_tau(c: &mut Criterion) {
    let s = series(10_000, 1);
    c.bench_function("kendall_tau_n10000", |b| {
        b.iter(|| kendall_tau(black_box(&s)).unwrap())
    });
}

fn bench_kendall_path(c: &mut Criterion) {
    let s = series(2_000, 2);
    c.bench_function("kendall_path_n2000", |b| {
        b.iter(|| kendall_path(black_box(&s)).unwrap())
    });
}

fn bench_joint_ecdf(c: &mut Criterion) {
    let s = series(10_000, 3);
    c.bench_function("joint_ecdf_n10000", |b| {
        b.iter(|| joint_ecdf_at_sample(black_box(&s)))
    });
}

fn bench_lrv(c: &mut Criterion) {
    let s = series(100_000, 4);
    let tau = kendall_tau(&s).unwrap();
    let psi = psi_hat(&s, tau, true).unwrap();
    let config = LrvConfig::default();
    c.bench_function("lrv_estimate_n100000", |b| {
        b.iter(|| lrv_estimate_slice(black_box(&psi.values), &config).unwrap())
    });
}

fn bench_change_test(c: &mut Criterion) {
    let s = series(1_000, 5);
    let config = LrvConfig::default();
    c.bench_function("kendall_change_test_n1000", |b| {
        b.iter(|| kendall_change_test(black_box(&s), &config, 0.05).unwrap())
    });
}

fn bench_scenario_generation(c: &mut Criterion) {
    let innovation = InnovationSpec {
        family: Family::Normal,
        rho: 0.4,
    };
    let spec = ScenarioSpec {
        first: innovation,
        second: innovation,
        phi: 0.8,
        n: 10_000,
        change_fraction: 0.5,
        burn_in: 1_000,
        seed: 6,
    };
    c.bench_function("scenario_series_ar_n10000", |b| {
        b.iter(|| generate(black_box(&spec)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_kendall_tau,
    bench_kendall_path,
    bench_joint_ecdf,
    bench_lrv,
    bench_change_test,
    bench_scenario_generation
);
criterion_main!(benches);
