//! Benchmarks for the hot paths: the event-driven simulator under the main
//! rate policies, the sequence-error computation, and the fair-share solver.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use predsched_core::algorithms::{run_policy, PolicySpec};
use predsched_core::errors::eta_s;
use predsched_core::experiments::{generate_instance, EnvKind, ExperimentConfig, ExperimentKind};
use predsched_core::model::{wspt_order, Instance, PermutationPrediction};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::hint::black_box;

fn single_instance(n: usize) -> Instance {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Sensitivity, EnvKind::Single);
    cfg.n = n;
    let mut rng = ChaCha12Rng::seed_from_u64(42);
    generate_instance(&cfg, &mut rng)
}

fn identical_instance(n: usize, m: usize) -> Instance {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Sensitivity, EnvKind::Identical);
    cfg.n = n;
    cfg.m = m;
    let mut rng = ChaCha12Rng::seed_from_u64(42);
    generate_instance(&cfg, &mut rng)
}

fn bench_simulator(c: &mut Criterion) {
    let inst = single_instance(500);
    let order = wspt_order(&inst.weights(), &inst.processings()).unwrap();
    let pred = PermutationPrediction::SingleOrder(order);
    c.bench_function("rr_single_500", |b| {
        b.iter(|| run_policy(black_box(&inst), &PolicySpec::Rr, None, false).unwrap())
    });
    c.bench_function("pts_wspt_rr_single_500", |b| {
        let spec: PolicySpec = "pts(wspt,rr,0.1)".parse().unwrap();
        b.iter(|| run_policy(black_box(&inst), &spec, Some(&pred), false).unwrap())
    });
    let multi = identical_instance(300, 5);
    c.bench_function("wdeq_identical_300x5", |b| {
        b.iter(|| run_policy(black_box(&multi), &PolicySpec::Wdeq, None, false).unwrap())
    });
}

fn bench_errors(c: &mut Criterion) {
    let inst = single_instance(1000);
    let mut order: Vec<usize> = (1..=inst.n()).collect();
    order.reverse();
    c.bench_function("eta_s_1000", |b| {
        b.iter(|| eta_s(black_box(&inst), black_box(&order)).unwrap())
    });
}

fn bench_fair_share(c: &mut Criterion) {
    let inst = identical_instance(40, 4);
    c.bench_function("pf_identical_40x4", |b| {
        b.iter_batched(
            || inst.clone(),
            |inst| run_policy(&inst, &PolicySpec::Pf, None, false).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, bench_simulator, bench_errors, bench_fair_share);
criterion_main!(benches);
