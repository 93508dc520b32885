//! Benchmarks for the hot paths: softmax, the stacked encode used at
//! inference time, one epoch of pretraining and fine-tuning, forest
//! training and voting, and metric computation.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, Criterion};

use saeforest::forest::{train_forest, ForestConfig};
use saeforest::metrics::{compute_metrics, ConfusionCounts};
use saeforest::nn::{finetune_supervised, softmax};
use saeforest::random::RandomSource;
use saeforest_bench::{normalized_with_stack, one_epoch, separable_dataset};

fn bench_softmax(c: &mut Criterion) {
    let mut rng = RandomSource::new(1);
    let logits: Vec<f64> = (0..10).map(|_| rng.uniform(-100.0, 100.0)).collect();
    c.bench_function("softmax_10_logits", |b| {
        b.iter(|| softmax(black_box(&logits)))
    });
}

fn bench_encode(c: &mut Criterion) {
    let (xn, stack, _) = normalized_with_stack(1000, 80, &[64, 32], 2);
    c.bench_function("stacked_encode_1000x80", |b| {
        b.iter(|| stack.encode(black_box(&xn)).unwrap())
    });
}

fn bench_training_epochs(c: &mut Criterion) {
    let mut group = c.benchmark_group("training");
    group.sample_size(10).measurement_time(Duration::from_secs(5));

    group.bench_function("pretrain_epoch_512x32_to_16", |b| {
        let (xn, stack, _) = normalized_with_stack(512, 32, &[16], 3);
        b.iter_batched(
            || stack.clone(),
            |mut s| s.pretrain(black_box(&xn), &one_epoch(7)).unwrap(),
            criterion::BatchSize::LargeInput,
        )
    });

    group.bench_function("finetune_epoch_512x32", |b| {
        let (xn, stack, head) = normalized_with_stack(512, 32, &[16, 8], 4);
        let labels: Vec<u32> = (0..512).map(|i| u32::from(i % 2 == 0)).collect();
        b.iter_batched(
            || (stack.clone(), head.clone()),
            |(mut s, mut h)| {
                finetune_supervised(&mut s, &mut h, black_box(&xn), &labels, &one_epoch(9), false)
                    .unwrap()
            },
            criterion::BatchSize::LargeInput,
        )
    });
    group.finish();
}

fn bench_forest(c: &mut Criterion) {
    let mut group = c.benchmark_group("forest");
    group.sample_size(10).measurement_time(Duration::from_secs(5));

    let (x, labels, _) = separable_dataset(500, 8, 5);
    let binary: Vec<u32> = labels.binary().iter().map(|&b| u32::from(b)).collect();
    let cfg = ForestConfig {
        n_trees: 20,
        seed: 11,
        ..ForestConfig::default()
    };
    group.bench_function("train_20_trees_500x8", |b| {
        b.iter(|| train_forest(black_box(&x), &binary, &cfg).unwrap())
    });

    let model = train_forest(&x, &binary, &cfg).unwrap();
    group.bench_function("predict_20_trees_500x8", |b| {
        b.iter(|| model.predict(black_box(&x)).unwrap())
    });
    group.finish();
}

fn bench_metrics(c: &mut Criterion) {
    let counts = ConfusionCounts {
        tp: 1913,
        tn: 7207,
        fp: 311,
        fn_count: 569,
    };
    c.bench_function("compute_metrics", |b| {
        b.iter(|| compute_metrics(black_box(counts)))
    });
}

criterion_group!(
    benches,
    bench_softmax,
    bench_encode,
    bench_training_epochs,
    bench_forest,
    bench_metrics
);
criterion_main!(benches);
