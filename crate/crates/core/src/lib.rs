//! Two-stage network-flow classifier.
//!
//! Stage 1 normalizes flow features, compresses them through a stacked
//! autoencoder pretrained layer by layer, and fine-tunes a softmax head
//! that scores each flow's attack probability. That probability is
//! appended to the features and stage 2 runs a second stacked autoencoder
//! over the augmented matrix, handing its encoding to a random forest for
//! the final decision. The crate also ships the ingestion path for
//! CICIDS-2017-style flow CSVs, a stratified 10-fold evaluation harness,
//! the four usual detection metrics, a seeded synthetic data generator,
//! and a checksummed single-file model bundle.
//!
//! Every source of randomness flows from one seed, so a whole run — data
//! splits, weight init, bootstrap draws, batch order — reproduces bit for
//! bit.
//!
//! ```
//! use saeforest::pipeline::{train_pipeline, PipelineConfig};
//! use saeforest::synth::{generate, SynthSpec};
//!
//! let out = generate(&SynthSpec::separable(200, 6, &["BENIGN", "DoS"], 7)).unwrap();
//! let table = saeforest::ingest::read_csv_from(out.csv.as_bytes(), "synth").unwrap();
//! let (x, raw, schema, _) =
//!     saeforest::ingest::encode_non_numeric(&table, "Label", Default::default()).unwrap();
//! let labels = saeforest::data::binarize_labels(&schema, &raw, "BENIGN").unwrap();
//!
//! let cfg = PipelineConfig {
//!     stage1_hidden: vec![8, 4],
//!     stage2_hidden: vec![8, 4],
//!     pretrain_epochs: 2,
//!     finetune_epochs: 4,
//!     learning_rate: 0.1,
//!     n_trees: 10,
//!     ..PipelineConfig::default()
//! };
//! let model = train_pipeline(&x, &labels, &schema, &cfg).unwrap();
//! let (codes, attack_probability) = model.predict(&x).unwrap();
//! assert_eq!(codes.len(), x.rows());
//! assert!(attack_probability.iter().all(|p| (0.0..=1.0).contains(p)));
//! ```

pub mod data;
pub mod error;
pub mod forest;
pub mod ingest;
pub mod metrics;
pub mod nn;
pub mod pipeline;
pub mod preprocess;
pub mod random;
pub mod synth;

pub use data::{binarize_labels, Dataset, DatasetSchema, FeatureMatrix, LabelColumn};
pub use error::{Error, Result};
pub use metrics::{compute_metrics, ConfusionCounts, MetricsReport, MetricsSummary};
pub use random::RandomSource;
