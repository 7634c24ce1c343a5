//! Cost of model evaluations: one expected length and a full walk-length scan.

use criterion::{criterion_group, criterion_main, Criterion};
use pwrw_core::model::{expected_search_length, optimal_walk_length, Churn, ModelParams};
use pwrw_core::{DegreeStats, Variant};
use std::hint::black_box;

fn params(churn: Churn, variant: Variant) -> ModelParams {
    let stats = DegreeStats { nodes: 10_000, kave: 10.0, endpoints: 100_000.0, k_rw: 26.0 };
    ModelParams { nodes: 10_000, s: 14, w: 5, p: 0.01, churn, variant, stats }
}

fn bench_model(c: &mut Criterion) {
    let resources = params(Churn::balanced(0.01, 0.3).unwrap(), Variant::CheckFirst);
    let nodes = params(Churn::Nodes { l: 0.3 }, Variant::CheckFirst);
    c.bench_function("expected length, resource churn", |b| {
        b.iter(|| expected_search_length(black_box(&resources)).unwrap())
    });
    c.bench_function("expected length, node churn", |b| {
        b.iter(|| expected_search_length(black_box(&nodes)).unwrap())
    });
    c.bench_function("optimal s over 1..=60, node churn", |b| {
        b.iter(|| optimal_walk_length(black_box(&nodes), 1..=60).unwrap())
    });
}

criterion_group!(benches, bench_model);
criterion_main!(benches);
