use std::hint::black_box;

use brownexec_core::execmodel::{simulate_approach1, simulate_approach2, EtaCurve, ExecutionParams, TradeGrid};
use brownexec_core::rng::{seeded, standard_normals};
use brownexec_core::{async_test, regular_test, IncrementSeries, RegularTestConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn brownian(n: usize) -> IncrementSeries {
    IncrementSeries::regular(1.0, standard_normals(&mut seeded(1), n)).unwrap()
}

fn tests(c: &mut Criterion) {
    let cfg = RegularTestConfig::default();
    let mut g = c.benchmark_group("tests");
    for n in [1_000, 10_000, 100_000] {
        let incs = brownian(n);
        g.bench_with_input(BenchmarkId::new("regular", n), &incs, |b, incs| {
            b.iter(|| regular_test(black_box(incs), &cfg).unwrap())
        });
        let gaps: Vec<f64> = (0..n).map(|i| 0.5 + (i % 7) as f64 * 0.25).collect();
        let horizon = gaps.iter().sum();
        let irregular = IncrementSeries::new(gaps, incs.increments.clone(), horizon).unwrap();
        g.bench_with_input(BenchmarkId::new("async", n), &irregular, |b, incs| {
            b.iter(|| async_test(black_box(incs), &cfg).unwrap())
        });
    }
    g.finish();
}

fn riccati(c: &mut Criterion) {
    let defaults = ExecutionParams::default();
    c.bench_function("eta/numerical-default-params", |b| {
        b.iter(|| EtaCurve::new(black_box(&defaults)).unwrap())
    });
    let closed = ExecutionParams {
        alpha_perm: 0.5,
        kappa_temp: 1.0,
        running_penalty: 1.0,
        terminal_penalty: 1.0,
        horizon: 10.0,
        ..Default::default()
    };
    c.bench_function("eta/closed-form", |b| b.iter(|| EtaCurve::new(black_box(&closed)).unwrap()));
}

fn simulations(c: &mut Criterion) {
    let n = 1_000;
    let times: Vec<f64> = (0..n).map(|i| 0.1 * i as f64).collect();
    let grid = TradeGrid::new(times, vec![40.0; n], vec![1e4; n], vec![0.0; n]).unwrap();
    let p = ExecutionParams {
        alpha_perm: 0.0,
        kappa_temp: 1.0e3,
        running_penalty: 10.0,
        terminal_penalty: 1.0e3,
        sigma_price: 0.05,
        sigma_inv: 30.0,
        horizon: 100.0,
        q0: 1.0e4,
        ..Default::default()
    };
    let mut g = c.benchmark_group("simulate");
    g.sample_size(20);
    g.bench_function("approach1/1000x1000", |b| b.iter(|| simulate_approach1(&grid, &p, 1_000, 7).unwrap()));
    g.bench_function("approach2/1000x1000", |b| b.iter(|| simulate_approach2(&grid, &p, 1_000, 7).unwrap()));
    g.finish();
}

criterion_group!(benches, tests, riccati, simulations);
criterion_main!(benches);
