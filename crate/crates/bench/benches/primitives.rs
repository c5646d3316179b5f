use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use iparts_core::offline::{knapsack_select, KnapsackItem};
use iparts_core::privacy::{self, CalibratedEps, IntentState};
use iparts_core::quality::{quality_risk, RiskMethod};
use iparts_core::rng;

fn knapsack(c: &mut Criterion) {
    let mut group = c.benchmark_group("knapsack");
    for n in [10usize, 30, 100] {
        let items: Vec<KnapsackItem> = (0..n)
            .map(|id| KnapsackItem {
                id,
                price: 40.0 + (rng::unit_uniform(1, "p", &[id as u64]) * 15.0).round(),
                value: 50.0 + 150.0 * rng::unit_uniform(1, "v", &[id as u64]),
            })
            .collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &items, |b, items| {
            b.iter(|| knapsack_select(items, 225.0))
        });
    }
    group.finish();
}

fn memoized_reporting(c: &mut Criterion) {
    c.bench_function("memo_epoch_40_tasks", |b| {
        let truth: Vec<bool> = (0..40).map(|i| i % 3 != 0).collect();
        let mut round = 0u64;
        b.iter(|| {
            let mut st = IntentState::new(
                7,
                truth.clone(),
                CalibratedEps::Feasible(0.9),
                10,
                round,
            )
            .unwrap();
            round += 1;
            st.report(0).unwrap().to_vec()
        })
    });
}

fn inference(c: &mut Criterion) {
    let prior = vec![0.5; 40];
    let weights = vec![1.0; 40];
    let report: Vec<bool> = (0..40).map(|i| i % 2 == 0).collect();
    c.bench_function("one_snapshot_attack_40", |b| {
        b.iter(|| privacy::one_snapshot_attack(&report, &prior, 0.85, &weights).unwrap())
    });
    c.bench_function("inference_error_40", |b| {
        b.iter(|| privacy::one_snapshot_inference_error(&prior, 0.85, &weights).unwrap())
    });
}

fn risk(c: &mut Criterion) {
    let contracted: Vec<(f64, f64)> =
        (0..5).map(|k| (22.0 + k as f64, 0.6 + 0.05 * k as f64)).collect();
    c.bench_function("quality_risk_exact_5", |b| {
        b.iter(|| quality_risk(&contracted, 0.2, 24.0, RiskMethod::Exact).unwrap())
    });
    c.bench_function("quality_risk_mc_200", |b| {
        b.iter(|| {
            quality_risk(&contracted, 0.2, 24.0, RiskMethod::MonteCarlo { samples: 200, seed: 3 })
                .unwrap()
        })
    });
}

criterion_group!(benches, knapsack, memoized_reporting, inference, risk);
criterion_main!(benches);
