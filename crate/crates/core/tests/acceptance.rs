//! Acceptance suite.
//!
//! One test per release gate, each printing a `ACCEPTANCE <name>: PASS`
//! line with its elapsed time. The numeric gates are checked against
//! independent oracles implemented in this file (exact rational
//! arithmetic for the metrics, central finite differences for the
//! gradients, an exhaustive-split reference tree for the forest), never
//! against the code under test.
//!
//! Run with `cargo test -p saeforest --test acceptance -- --nocapture`.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use saeforest::data::{DatasetSchema, FeatureMatrix, LabelColumn};
use saeforest::ingest::{self, IngestOptions};
use saeforest::metrics::{compute_metrics, ConfusionCounts};
use saeforest::nn::{
    self, softmax, Activation, SoftmaxHead, StackedAutoencoder, TiedAutoencoder,
    TrainConfig,
};
use saeforest::pipeline::{
    cross_validate, cross_validate_with, model_to_bytes, train_pipeline, AblationKind,
    PipelineConfig,
};
use saeforest::preprocess::{Normalizer, NormalizerMode};
use saeforest::random::RandomSource;
use saeforest::synth::{generate, DefectFlags, SynthSpec};

/// The two long-running gates take this lock so their elapsed-time
/// budgets are not distorted by running concurrently with each other.
static HEAVY: Mutex<()> = Mutex::new(());

fn pass(name: &str, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    println!(
        "ACCEPTANCE {name}: PASS ({:.2}s of {:.0}s budget)",
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    assert!(
        elapsed <= budget,
        "{name} exceeded its runtime budget: {elapsed:?} > {budget:?}"
    );
}

// ───────────────────────── metrics vs rational oracle ─────────────────────

/// Exact rational (num, den) with u128 arithmetic; den == 0 encodes the
/// zero-denominator convention (value 0).
fn rational_to_f64(num: u128, den: u128) -> f64 {
    if den == 0 || num == 0 {
        return 0.0;
    }
    // Counts are capped so both sides stay below 2^53: one IEEE division
    // of exactly representable integers is the correctly rounded value.
    assert!(num < (1 << 53) && den < (1 << 53));
    num as f64 / den as f64
}

#[test]
fn metric_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = RandomSource::new(0xACCE97);
    for trial in 0..1000 {
        let tp = rng.index(1_000_000) as u64;
        let tn = rng.index(1_000_000) as u64;
        let fp = rng.index(1_000_000) as u64;
        let fn_count = rng.index(1_000_000) as u64;
        if tp + tn + fp + fn_count == 0 {
            continue;
        }
        let m = compute_metrics(ConfusionCounts {
            tp,
            tn,
            fp,
            fn_count,
        });
        let (tp, tn, fp, fnc) = (tp as u128, tn as u128, fp as u128, fn_count as u128);

        let acc = rational_to_f64(tp + tn, tp + tn + fp + fnc);
        let prec = rational_to_f64(tp, tp + fp);
        let rec = rational_to_f64(tp, tp + fnc);
        assert_eq!(m.accuracy.to_bits(), acc.to_bits(), "trial {trial}");
        assert_eq!(m.precision.to_bits(), prec.to_bits(), "trial {trial}");
        assert_eq!(m.recall.to_bits(), rec.to_bits(), "trial {trial}");

        // f1 = 2PR/(P+R) composed as exact rationals...
        let pr_num = 2 * tp * tp;
        let pr_den = (tp + fp) * (tp + fnc);
        let sum_num = tp * (tp + fnc) + tp * (tp + fp);
        let sum_den = pr_den;
        let f1 = if sum_num == 0 {
            0.0
        } else {
            // ...equals the single-division form iff cross-products agree.
            let lhs_num = pr_num * sum_den;
            let lhs_den = pr_den * sum_num;
            assert_eq!(
                lhs_num * (2 * tp + fp + fnc),
                lhs_den * 2 * tp,
                "harmonic and single-division forms disagree at trial {trial}"
            );
            rational_to_f64(2 * tp, 2 * tp + fp + fnc)
        };
        assert_eq!(m.f1.to_bits(), f1.to_bits(), "trial {trial}");
    }
    pass("metric-oracle-equivalence", started, Duration::from_secs(1));
}

// ───────────────────────────── softmax contract ───────────────────────────

#[test]
fn softmax_contract() {
    let started = Instant::now();
    let mut rng = RandomSource::new(0x50F7);
    for _ in 0..10_000 {
        let dim = 2 + rng.index(9);
        let logits: Vec<f64> = (0..dim).map(|_| rng.uniform(-1e3, 1e3)).collect();
        let p = softmax(&logits);

        let sum: f64 = p.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-9, "sum {sum} for {logits:?}");
        assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));

        let shift = rng.uniform(-1e3, 1e3);
        let shifted: Vec<f64> = logits.iter().map(|&z| z + shift).collect();
        let q = softmax(&shifted);
        for (a, b) in p.iter().zip(&q) {
            assert!(
                (a - b).abs() <= 1e-12,
                "shift invariance violated: {a} vs {b} (shift {shift})"
            );
        }
    }
    pass("softmax-contract", started, Duration::from_secs(5));
}

// ──────────────────────── gradients vs finite differences ─────────────────

const FD_STEP: f64 = 1e-5;
const KINK_MARGIN: f64 = 1e-3;

fn close(analytic: f64, fd: f64) -> bool {
    let diff = (analytic - fd).abs();
    diff <= 1e-4 * analytic.abs().max(fd.abs()) || diff <= 1e-8
}

/// Random 3→2 autoencoder + batch whose ReLU pre-activations all sit at
/// least KINK_MARGIN away from zero, so finite differences are valid.
fn non_kink_point(seed: u64) -> Option<(TiedAutoencoder, SoftmaxHead, FeatureMatrix, Vec<u32>)> {
    let mut rng = RandomSource::new(seed);
    let mut ae = TiedAutoencoder::init(3, 2, 1.0, &mut rng);
    for b in ae.encoder_mut().bias_mut() {
        *b = rng.uniform(-0.3, 0.3);
    }
    for b in ae.decoder_bias_mut() {
        *b = rng.uniform(-0.3, 0.3);
    }
    let head = SoftmaxHead::init(2, 2, 1.0, &mut rng).ok()?;
    let values: Vec<f64> = (0..5 * 3).map(|_| rng.uniform(0.05, 1.0)).collect();
    let x = FeatureMatrix::new(5, 3, values).ok()?;
    let labels: Vec<u32> = (0..5).map(|_| rng.index(2) as u32).collect();

    // Reject configurations with any pre-activation near a ReLU kink.
    let z1 = ae.encoder().preactivation(&x);
    if z1.values().iter().any(|z| z.abs() < KINK_MARGIN) {
        return None;
    }
    let hidden = ae.encode(&x, Activation::Relu).ok()?;
    let y = ae.decode(&hidden, Activation::Linear).ok()?;
    // The decoder is linear here, but keep the margin anyway so the same
    // point also works under a ReLU decoder.
    if y.values().iter().any(|z| z.abs() < KINK_MARGIN) {
        return None;
    }
    Some((ae, head, x, labels))
}

fn stack_of(ae: &TiedAutoencoder) -> StackedAutoencoder {
    let mut rng = RandomSource::new(0);
    let mut stack = StackedAutoencoder::init(
        ae.in_dim(),
        &[ae.hidden_dim()],
        Activation::Relu,
        Activation::Linear,
        1.0,
        &mut rng,
    )
    .unwrap();
    stack.layers_mut()[0] = ae.clone();
    stack
}

#[test]
fn gradient_check() {
    let started = Instant::now();
    let mut accepted = 0;
    let mut seed = 1u64;
    while accepted < 20 {
        seed += 1;
        assert!(seed < 10_000, "could not find 20 non-kink points");
        let Some((ae, head, x, labels)) = non_kink_point(seed) else {
            continue;
        };
        accepted += 1;

        // Reconstruction loss: every parameter of the tied autoencoder.
        let grads = ae
            .reconstruction_grads(&x, Activation::Relu, Activation::Linear)
            .unwrap();
        let loss_at = |ae: &TiedAutoencoder| {
            ae.reconstruction_loss(&x, Activation::Relu, Activation::Linear)
                .unwrap()
        };
        for (i, &g) in grads.weight.iter().enumerate() {
            let mut plus = ae.clone();
            plus.encoder_mut().weight_mut()[i] += FD_STEP;
            let mut minus = ae.clone();
            minus.encoder_mut().weight_mut()[i] -= FD_STEP;
            let fd = (loss_at(&plus) - loss_at(&minus)) / (2.0 * FD_STEP);
            assert!(close(g, fd), "recon weight[{i}]: analytic {g} vs fd {fd}");
        }
        for (i, &g) in grads.encoder_bias.iter().enumerate() {
            let mut plus = ae.clone();
            plus.encoder_mut().bias_mut()[i] += FD_STEP;
            let mut minus = ae.clone();
            minus.encoder_mut().bias_mut()[i] -= FD_STEP;
            let fd = (loss_at(&plus) - loss_at(&minus)) / (2.0 * FD_STEP);
            assert!(close(g, fd), "recon b1[{i}]: analytic {g} vs fd {fd}");
        }
        for (i, &g) in grads.decoder_bias.iter().enumerate() {
            let mut plus = ae.clone();
            plus.decoder_bias_mut()[i] += FD_STEP;
            let mut minus = ae.clone();
            minus.decoder_bias_mut()[i] -= FD_STEP;
            let fd = (loss_at(&plus) - loss_at(&minus)) / (2.0 * FD_STEP);
            assert!(close(g, fd), "recon b2[{i}]: analytic {g} vs fd {fd}");
        }

        // Cross-entropy through encoder + softmax head.
        let stack = stack_of(&ae);
        let sup = nn::supervised_grads(&stack, &head, &x, &labels).unwrap();
        let sup_loss = |stack: &StackedAutoencoder, head: &SoftmaxHead| {
            nn::supervised_loss(stack, head, &x, &labels).unwrap()
        };
        for (i, &g) in sup.layers[0].weight.iter().enumerate() {
            let mut plus = stack.clone();
            plus.layers_mut()[0].encoder_mut().weight_mut()[i] += FD_STEP;
            let mut minus = stack.clone();
            minus.layers_mut()[0].encoder_mut().weight_mut()[i] -= FD_STEP;
            let fd = (sup_loss(&plus, &head) - sup_loss(&minus, &head)) / (2.0 * FD_STEP);
            assert!(close(g, fd), "xent weight[{i}]: analytic {g} vs fd {fd}");
        }
        for (i, &g) in sup.layers[0].bias.iter().enumerate() {
            let mut plus = stack.clone();
            plus.layers_mut()[0].encoder_mut().bias_mut()[i] += FD_STEP;
            let mut minus = stack.clone();
            minus.layers_mut()[0].encoder_mut().bias_mut()[i] -= FD_STEP;
            let fd = (sup_loss(&plus, &head) - sup_loss(&minus, &head)) / (2.0 * FD_STEP);
            assert!(close(g, fd), "xent bias[{i}]: analytic {g} vs fd {fd}");
        }
        for (i, &g) in sup.head.weight.iter().enumerate() {
            let mut plus = head.clone();
            plus.layer_mut().weight_mut()[i] += FD_STEP;
            let mut minus = head.clone();
            minus.layer_mut().weight_mut()[i] -= FD_STEP;
            let fd = (sup_loss(&stack, &plus) - sup_loss(&stack, &minus)) / (2.0 * FD_STEP);
            assert!(close(g, fd), "head weight[{i}]: analytic {g} vs fd {fd}");
        }
        for (i, &g) in sup.head.bias.iter().enumerate() {
            let mut plus = head.clone();
            plus.layer_mut().bias_mut()[i] += FD_STEP;
            let mut minus = head.clone();
            minus.layer_mut().bias_mut()[i] -= FD_STEP;
            let fd = (sup_loss(&stack, &plus) - sup_loss(&stack, &minus)) / (2.0 * FD_STEP);
            assert!(close(g, fd), "head bias[{i}]: analytic {g} vs fd {fd}");
        }
    }
    pass("gradient-check", started, Duration::from_secs(10));
}

// ───────────────────────────── pretraining descent ────────────────────────

#[test]
fn pretraining_descent() {
    let started = Instant::now();
    // 8-dimensional data with a 4-dimensional latent structure.
    let mut rng = RandomSource::new(0xDE5C);
    let mix: Vec<f64> = (0..4 * 8).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let mut values = Vec::with_capacity(256 * 8);
    for _ in 0..256 {
        let z: Vec<f64> = (0..4).map(|_| rng.normal()).collect();
        for j in 0..8 {
            let v: f64 = z.iter().enumerate().map(|(k, &zk)| zk * mix[k * 8 + j]).sum();
            values.push(v + 0.02 * rng.normal());
        }
    }
    let x = FeatureMatrix::new(256, 8, values).unwrap();

    let mut ae = TiedAutoencoder::init(8, 4, 1.0, &mut rng);
    let history = ae
        .pretrain(
            &x,
            &TrainConfig {
                learning_rate: 0.02,
                epochs: 200,
                batch_size: 32,
                seed: 0xDE5C + 1,
                init_scale: 1.0,
            },
            Activation::Relu,
            Activation::Linear,
        )
        .unwrap();
    let initial = history[0];
    let final_loss = *history.last().unwrap();
    println!("  pretraining mse: initial {initial:.6}, final {final_loss:.6}");
    assert!(
        final_loss < 0.5 * initial,
        "final {final_loss} not below half of initial {initial}"
    );
    pass("pretraining-descent", started, Duration::from_secs(30));
}

// ─────────────────────── forest vs exhaustive-split oracle ────────────────

/// Reference tree: plain recursive CART over all features with naive
/// per-threshold recounting. Shares only the documented split rules with
/// the implementation under test: midpoint thresholds between distinct
/// sorted values, Gini gain with strict improvement, ties toward the
/// lowest feature index and threshold, `<=` routes left.
enum OracleNode {
    Leaf(u32),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<OracleNode>,
        right: Box<OracleNode>,
    },
}

fn oracle_gini(counts: &[u32]) -> f64 {
    let total: f64 = counts.iter().map(|&c| f64::from(c)).sum();
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = f64::from(c) / total;
            p * p
        })
        .sum::<f64>()
}

fn oracle_counts(labels: &[u32], idx: &[usize], n_classes: usize) -> Vec<u32> {
    let mut counts = vec![0u32; n_classes];
    for &i in idx {
        counts[labels[i] as usize] += 1;
    }
    counts
}

fn oracle_majority(counts: &[u32]) -> u32 {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate().skip(1) {
        if c > counts[best as usize] {
            best = i as u32;
        }
    }
    best
}

// Index loops are deliberate here: the oracle stays naive.
#[allow(clippy::needless_range_loop)]
fn oracle_build(
    rows: &[Vec<f64>],
    labels: &[u32],
    idx: &[usize],
    n_classes: usize,
    min_samples_split: usize,
) -> OracleNode {
    let counts = oracle_counts(labels, idx, n_classes);
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    if pure || idx.len() < min_samples_split {
        return OracleNode::Leaf(oracle_majority(&counts));
    }
    let parent = oracle_gini(&counts);
    let n_features = rows[0].len();
    let mut best: Option<(f64, usize, f64)> = None; // (gain, feature, threshold)
    for f in 0..n_features {
        let mut values: Vec<f64> = idx.iter().map(|&i| rows[i][f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let threshold = w[0] + (w[1] - w[0]) / 2.0;
            // Naive recount for this candidate.
            let mut left = vec![0u32; n_classes];
            let mut right = vec![0u32; n_classes];
            for &i in idx {
                if rows[i][f] <= threshold {
                    left[labels[i] as usize] += 1;
                } else {
                    right[labels[i] as usize] += 1;
                }
            }
            let (ln, rn) = (
                left.iter().sum::<u32>() as f64,
                right.iter().sum::<u32>() as f64,
            );
            let weighted =
                (ln * oracle_gini(&left) + rn * oracle_gini(&right)) / idx.len() as f64;
            let gain = parent - weighted;
            if gain > 1e-12 && best.is_none_or(|(bg, _, _)| gain > bg + 1e-12) {
                best = Some((gain, f, threshold));
            }
        }
    }
    let Some((_, feature, threshold)) = best else {
        return OracleNode::Leaf(oracle_majority(&counts));
    };
    let (li, ri): (Vec<usize>, Vec<usize>) =
        idx.iter().partition(|&&i| rows[i][feature] <= threshold);
    OracleNode::Split {
        feature,
        threshold,
        left: Box::new(oracle_build(rows, labels, &li, n_classes, min_samples_split)),
        right: Box::new(oracle_build(rows, labels, &ri, n_classes, min_samples_split)),
    }
}

fn oracle_predict(node: &OracleNode, row: &[f64]) -> u32 {
    match node {
        OracleNode::Leaf(class) => *class,
        OracleNode::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            if row[*feature] <= *threshold {
                oracle_predict(left, row)
            } else {
                oracle_predict(right, row)
            }
        }
    }
}

fn forest_fixtures() -> Vec<(Vec<Vec<f64>>, Vec<u32>)> {
    let mut fixtures: Vec<(Vec<Vec<f64>>, Vec<u32>)> = vec![
        // Consistent two-feature data with interactions.
        (
            vec![
                vec![0.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
                vec![0.2, 0.9],
                vec![0.9, 0.2],
            ],
            vec![0, 1, 1, 0, 1, 1],
        ),
        // Single feature with duplicates.
        (
            vec![vec![1.0], vec![1.0], vec![2.0], vec![2.0], vec![3.0]],
            vec![0, 0, 1, 1, 1],
        ),
        // Three classes on a grid.
        (
            vec![
                vec![0.0, 0.0],
                vec![0.0, 2.0],
                vec![2.0, 0.0],
                vec![2.0, 2.0],
                vec![1.0, 1.0],
                vec![1.0, 3.0],
            ],
            vec![0, 1, 2, 2, 0, 1],
        ),
        // Constant feature plus an informative one.
        (
            vec![
                vec![5.0, 0.1],
                vec![5.0, 0.2],
                vec![5.0, 0.8],
                vec![5.0, 0.9],
            ],
            vec![0, 0, 1, 1],
        ),
        // Identical rows with conflicting labels: no split possible.
        (
            vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0]],
            vec![0, 1, 1],
        ),
    ];
    // Random grid-valued datasets force duplicate values and tied gains.
    let mut rng = RandomSource::new(0xF0457);
    for _ in 0..12 {
        let n = 5 + rng.index(46); // ≤ 50 samples
        let d = 1 + rng.index(4); // ≤ 4 features
        let classes = 2 + rng.index(2);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.index(5) as f64).collect())
            .collect();
        let labels: Vec<u32> = (0..n).map(|_| rng.index(classes) as u32).collect();
        fixtures.push((rows, labels));
    }
    fixtures
}

#[test]
fn forest_oracle() {
    let started = Instant::now();
    let single_tree = saeforest::forest::ForestConfig {
        n_trees: 1,
        bootstrap: false,
        feature_subset_size: Some(usize::MAX),
        seed: 0,
        ..saeforest::forest::ForestConfig::default()
    };
    let mut probe_rng = RandomSource::new(0xBEEF);
    for (fi, (rows, labels)) in forest_fixtures().iter().enumerate() {
        let n_classes = labels.iter().copied().max().unwrap_or(0) as usize + 1;
        let x = FeatureMatrix::from_rows(rows).unwrap();
        let model = saeforest::forest::train_forest(&x, labels, &single_tree).unwrap();

        let idx: Vec<usize> = (0..rows.len()).collect();
        let oracle = oracle_build(rows, labels, &idx, n_classes, 2);

        // Agreement on every training point.
        let predictions = model.predict(&x).unwrap();
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(
                predictions[r],
                oracle_predict(&oracle, row),
                "fixture {fi}, training row {r}"
            );
        }

        // Agreement on random probe points in and around the data range.
        for _ in 0..200 {
            let probe: Vec<f64> = (0..rows[0].len())
                .map(|_| probe_rng.uniform(-1.0, 6.0))
                .collect();
            let pm = FeatureMatrix::from_rows(std::slice::from_ref(&probe)).unwrap();
            assert_eq!(
                model.predict(&pm).unwrap()[0],
                oracle_predict(&oracle, &probe),
                "fixture {fi}, probe {probe:?}"
            );
        }

        // Consistent training data must be fit perfectly.
        let mut consistent = true;
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                if rows[i] == rows[j] && labels[i] != labels[j] {
                    consistent = false;
                }
            }
        }
        if consistent {
            for (r, &label) in labels.iter().enumerate() {
                assert_eq!(predictions[r], label, "fixture {fi} row {r} not fit");
            }
        }
    }
    pass("forest-oracle", started, Duration::from_secs(30));
}

// ──────────────────────────── end-to-end pipeline ─────────────────────────

const E2E_SEED: u64 = 20_17;

fn e2e_spec() -> SynthSpec {
    SynthSpec::separable(
        2000,
        80,
        &["BENIGN", "Web Attack - Brute Force"],
        E2E_SEED,
    )
    .with_defects(DefectFlags::all())
}

fn e2e_config() -> PipelineConfig {
    PipelineConfig {
        seed: E2E_SEED,
        stage1_hidden: vec![64, 32],
        stage2_hidden: vec![64, 32],
        learning_rate: 0.05,
        pretrain_epochs: 5,
        finetune_epochs: 8,
        batch_size: 64,
        n_trees: 30,
        ..PipelineConfig::default()
    }
}

fn ingest_e2e() -> (FeatureMatrix, LabelColumn, DatasetSchema) {
    let out = generate(&e2e_spec()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e2e.csv");
    std::fs::write(&path, &out.csv).unwrap();
    let (ds, report) = ingest::load_dataset(&[&path], &IngestOptions::default()).unwrap();
    assert_eq!(report.rows_repaired, out.injected.mojibake_labels);
    assert_eq!(
        report.cells_imputed,
        out.injected.infinity_cells + out.injected.nan_cells
    );
    assert!(report.rows_repaired > 0 && report.cells_imputed > 0);
    assert!(ds.features.is_finite());
    (ds.features, ds.labels, ds.schema)
}

#[test]
fn end_to_end_crossval() {
    let _guard = HEAVY.lock().unwrap();
    let started = Instant::now();
    let (x, labels, schema) = ingest_e2e();
    assert_eq!(x.cols(), 80);

    let mut covered = vec![0usize; x.rows()];
    let report = cross_validate_with(
        &x,
        &labels,
        &schema,
        &e2e_config(),
        AblationKind::TwoStageDsaeRf,
        |view| {
            for &i in view.test_indices {
                covered[i] += 1;
            }
            assert_eq!(view.train_indices.len() + view.test_indices.len(), x.rows());
            // Leakage guard: the fold's normalizer must hold exactly the
            // training-split extrema.
            let train_x = x.select_rows(view.train_indices);
            let (mins, maxs) = train_x.column_extrema()?;
            assert_eq!(view.model.normalizer().mins(), mins.as_slice());
            assert_eq!(view.model.normalizer().maxs(), maxs.as_slice());
            Ok(())
        },
    )
    .unwrap();
    assert!(
        covered.iter().all(|&c| c == 1),
        "every row must sit in exactly one test fold"
    );
    println!(
        "  end-to-end mean metrics: acc {:.4}, p {:.4}, r {:.4}, f1 {:.4}",
        report.mean.accuracy, report.mean.precision, report.mean.recall, report.mean.f1
    );
    assert!(
        report.mean.accuracy >= 0.95,
        "mean accuracy {} below 0.95",
        report.mean.accuracy
    );
    pass("end-to-end-crossval", started, Duration::from_secs(120));
}

// ───────────────────────────── ablation ordering ──────────────────────────

#[test]
fn ablation_ordering() {
    let _guard = HEAVY.lock().unwrap();
    let started = Instant::now();
    let (x, labels, schema) = ingest_e2e();
    let cfg = e2e_config();

    let mut f1_by_kind = Vec::new();
    for kind in AblationKind::ALL {
        let report = cross_validate(&x, &labels, &schema, &cfg, kind).unwrap();
        println!(
            "  {kind}: mean f1 {:.4}, mean acc {:.4}",
            report.mean.f1, report.mean.accuracy
        );
        f1_by_kind.push((kind, report.mean.f1));
    }
    let full = f1_by_kind
        .iter()
        .find(|(k, _)| *k == AblationKind::TwoStageDsaeRf)
        .expect("full model present")
        .1;
    for (kind, f1) in &f1_by_kind {
        assert!(
            full >= f1 - 0.02,
            "full-model f1 {full:.4} more than 0.02 below {kind} ({f1:.4})"
        );
    }
    pass("ablation-ordering", started, Duration::from_secs(600));
}

// ─────────────────────────────── determinism ──────────────────────────────

#[test]
fn determinism() {
    let _guard = HEAVY.lock().unwrap();
    let started = Instant::now();
    // The full end-to-end path twice over: synth → file → ingest →
    // train → bundle bytes, plus the cross-validation report.
    let run = || {
        let (x, labels, schema) = ingest_e2e();
        let cfg = e2e_config();
        let model = train_pipeline(&x, &labels, &schema, &cfg).unwrap();
        let bundle = model_to_bytes(&model).unwrap();
        let report =
            cross_validate(&x, &labels, &schema, &cfg, AblationKind::TwoStageDsaeRf).unwrap();
        let report_bytes = serde_json::to_vec(&report).unwrap();
        (bundle, report_bytes)
    };
    let (bundle_a, report_a) = run();
    let (bundle_b, report_b) = run();
    assert_eq!(bundle_a, bundle_b, "model bundles differ between runs");
    assert_eq!(report_a, report_b, "reports differ between runs");
    pass("determinism", started, Duration::from_secs(600));
}

// ─────────────────────────── normalization modes ──────────────────────────

#[test]
fn normalization_modes() {
    let started = Instant::now();
    let mut rng = RandomSource::new(0x0150);
    for trial in 0..50 {
        let rows = 2 + rng.index(40);
        let cols = 1 + rng.index(12);
        let train_values: Vec<f64> = (0..rows * cols).map(|_| rng.uniform(-1e4, 1e4)).collect();
        let train = FeatureMatrix::new(rows, cols, train_values).unwrap();
        // Application rows deliberately exceed the fitted range.
        let test_values: Vec<f64> = (0..20 * cols).map(|_| rng.uniform(-3e4, 3e4)).collect();
        let test = FeatureMatrix::new(20, cols, test_values).unwrap();

        let standard = Normalizer::fit(&train, NormalizerMode::Standard).unwrap();
        for &v in standard.apply(&test).unwrap().values() {
            assert!((0.0..=1.0).contains(&v), "trial {trial}: standard value {v}");
        }
        let literal = Normalizer::fit(&train, NormalizerMode::PaperLiteral).unwrap();
        for &v in literal.apply(&test).unwrap().values() {
            assert!((-1.0..=0.0).contains(&v), "trial {trial}: literal value {v}");
        }
    }
    pass("normalization-modes", started, Duration::from_secs(1));
}

// ──────────────── optional large-scale check on real data ─────────────────

/// Opt-in evaluation against a user-supplied CICIDS-2017
/// MachineLearningCVE CSV directory. Not part of the gate: reported
/// accuracy depends on hyperparameters, so this prints the result and a
/// comparison against the 0.87 ± 0.05 reference band instead of
/// asserting it.
///
/// ```sh
/// CICIDS_DIR=/data/MachineLearningCVE cargo test -p saeforest \
///     --test acceptance --release -- --ignored --nocapture
/// ```
///
/// `CICIDS_MAX_ROWS` (default 50000) caps the stratified subsample so
/// the run finishes at desk scale.
#[test]
#[ignore = "needs CICIDS_DIR pointing at a MachineLearningCVE CSV directory"]
fn cicids_large_scale() {
    let dir = std::env::var("CICIDS_DIR").expect("set CICIDS_DIR to run this test");
    let max_rows: usize = std::env::var("CICIDS_MAX_ROWS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(50_000);

    let mut paths: Vec<std::path::PathBuf> = std::fs::read_dir(&dir)
        .expect("CICIDS_DIR must be readable")
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    assert!(!paths.is_empty(), "no CSV files in {dir}");

    let (ds, report) = ingest::load_dataset(&paths, &IngestOptions::default()).unwrap();
    println!(
        "  ingested {} rows from {} files ({} repaired labels, {} imputed cells)",
        report.rows_total, report.files_read, report.rows_repaired, report.cells_imputed
    );

    // Deterministic stratified subsample to keep the run tractable.
    let (x, labels) = if ds.features.rows() > max_rows {
        let mut rng = RandomSource::new(1);
        let binary = ds.labels.binary();
        let keep_fraction = max_rows as f64 / ds.features.rows() as f64;
        let mut keep = Vec::new();
        for class in [0u8, 1u8] {
            let mut idx: Vec<usize> =
                (0..binary.len()).filter(|&i| binary[i] == class).collect();
            rng.shuffle(&mut idx);
            let n = ((idx.len() as f64) * keep_fraction).round() as usize;
            keep.extend_from_slice(&idx[..n.min(idx.len())]);
        }
        keep.sort_unstable();
        (ds.features.select_rows(&keep), ds.labels.select(&keep))
    } else {
        (ds.features.clone(), ds.labels.clone())
    };
    println!("  evaluating on {} rows x {} features", x.rows(), x.cols());

    let cfg = PipelineConfig {
        seed: 1,
        learning_rate: 0.05,
        pretrain_epochs: 10,
        finetune_epochs: 15,
        n_trees: 50,
        ..PipelineConfig::default()
    };
    let report = cross_validate(&x, &labels, &ds.schema, &cfg, AblationKind::TwoStageDsaeRf)
        .unwrap();
    println!(
        "  10-fold mean: acc {:.4} ± {:.4}, p {:.4}, r {:.4}, f1 {:.4}",
        report.mean.accuracy, report.std.accuracy, report.mean.precision, report.mean.recall,
        report.mean.f1
    );
    let within = (report.mean.accuracy - 0.87).abs() <= 0.05;
    println!(
        "  reference band 0.87 ± 0.05: {}",
        if within { "within" } else { "outside (informative only)" }
    );
}
