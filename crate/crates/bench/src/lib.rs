//! Shared fixtures for the benchmarks: seeded separable datasets and
//! pre-trained components, so each benchmark measures one path instead
//! of its setup.

use saeforest::data::{binarize_labels, DatasetSchema, FeatureMatrix, LabelColumn};
use saeforest::ingest::{encode_non_numeric, read_csv_from, ImputeMode};
use saeforest::nn::{Activation, SoftmaxHead, StackedAutoencoder, TrainConfig};
use saeforest::preprocess::{Normalizer, NormalizerMode};
use saeforest::random::RandomSource;
use saeforest::synth::{generate, SynthSpec};

/// Two separable classes, ingested through the real CSV path.
pub fn separable_dataset(
    rows: usize,
    features: usize,
    seed: u64,
) -> (FeatureMatrix, LabelColumn, DatasetSchema) {
    let spec = SynthSpec::separable(rows, features, &["BENIGN", "DoS"], seed);
    let out = generate(&spec).expect("valid spec");
    let table = read_csv_from(out.csv.as_bytes(), "bench").expect("generated csv parses");
    let (x, raw, schema, _) =
        encode_non_numeric(&table, "Label", ImputeMode::Zero).expect("encodable");
    let labels = binarize_labels(&schema, &raw, "BENIGN").expect("benign class present");
    (x, labels, schema)
}

/// Normalized features plus an initialized (not pretrained) stack and
/// head of the given widths.
pub fn normalized_with_stack(
    rows: usize,
    features: usize,
    hidden: &[usize],
    seed: u64,
) -> (FeatureMatrix, StackedAutoencoder, SoftmaxHead) {
    let (x, _, _) = separable_dataset(rows, features, seed);
    let normalizer = Normalizer::fit(&x, NormalizerMode::Standard).expect("nonempty");
    let xn = normalizer.apply(&x).expect("same width");
    let mut rng = RandomSource::new(seed ^ 0xB34C);
    let stack = StackedAutoencoder::init(
        features,
        hidden,
        Activation::Relu,
        Activation::Linear,
        1.0,
        &mut rng,
    )
    .expect("valid widths");
    let head = SoftmaxHead::init(stack.output_dim(), 2, 1.0, &mut rng).expect("two classes");
    (xn, stack, head)
}

/// One-epoch training config used by the training-path benchmarks.
pub fn one_epoch(seed: u64) -> TrainConfig {
    TrainConfig {
        learning_rate: 0.05,
        epochs: 1,
        batch_size: 64,
        seed,
        init_scale: 1.0,
    }
}
