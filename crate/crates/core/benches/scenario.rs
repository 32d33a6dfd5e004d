//! Compares the data-parallel runner against the sequential path on the
//! built-in scenarios and on a multi-seed batch.
//!
//! With `--no-default-features` both entry points run sequentially; the
//! comparison is meaningful in the default (parallel) build.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sakf_core::sim::BuiltinScenario;
use sakf_core::{
    run_scenario, run_scenario_sequential, run_seed_batch, run_seed_batch_sequential, Scenario,
};
use std::hint::black_box;

fn bench_single_scenario(c: &mut Criterion) {
    let mut group = c.benchmark_group("single_run");
    for which in [BuiltinScenario::Jumps, BuiltinScenario::Drift] {
        let scenario = Scenario::builtin(which);
        group.bench_with_input(
            BenchmarkId::new("parallel", &scenario.name),
            &scenario,
            |b, s| b.iter(|| run_scenario(black_box(s)).unwrap()),
        );
        group.bench_with_input(
            BenchmarkId::new("sequential", &scenario.name),
            &scenario,
            |b, s| b.iter(|| run_scenario_sequential(black_box(s)).unwrap()),
        );
    }
    group.finish();
}

fn bench_seed_batch(c: &mut Criterion) {
    let scenario = Scenario::builtin(BuiltinScenario::Drift);
    let seeds: Vec<u64> = (0..16).collect();
    let mut group = c.benchmark_group("seed_batch_16");
    group.bench_function("parallel", |b| {
        b.iter(|| run_seed_batch(black_box(&scenario), black_box(&seeds)).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| run_seed_batch_sequential(black_box(&scenario), black_box(&seeds)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_single_scenario, bench_seed_batch);
criterion_main!(benches);
