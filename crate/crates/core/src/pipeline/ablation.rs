//! The five model configurations compared against each other: the bare
//! stacked autoencoder, stage 1 alone (with softmax or forest), the two
//! stages with a softmax head, and the full two-stage model with the
//! forest.

use serde::{Deserialize, Serialize};

use crate::data::{DatasetSchema, FeatureMatrix, LabelColumn};
use crate::error::{Error, Result};
use crate::forest::{train_forest, ForestModel};
use crate::metrics::{compute_metrics, ConfusionCounts, MetricsReport};
use crate::nn::{argmax_rows, finetune_supervised, predict_proba, Activation, SoftmaxHead,
    StackedAutoencoder};
use crate::pipeline::{
    augment, fit_stage_one, streams, train_pipeline, PipelineConfig, PipelineModel, StageOneModel,
};
use crate::preprocess::Normalizer;
use crate::random::RandomSource;

/// Which model variant to train.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AblationKind {
    /// Unsupervised stacked autoencoder scored by a reconstruction-error
    /// threshold.
    DsaeOnly,
    /// Stage 1 alone: stacked autoencoder + softmax head.
    SaeSoftmax,
    /// Stage-1 encoding classified by a forest, no probability feature.
    SaeRf,
    /// Both stages with a softmax head replacing the forest.
    TwoStageSoftmax,
    /// The full model.
    #[default]
    TwoStageDsaeRf,
}

impl AblationKind {
    pub const ALL: [AblationKind; 5] = [
        AblationKind::DsaeOnly,
        AblationKind::SaeSoftmax,
        AblationKind::SaeRf,
        AblationKind::TwoStageSoftmax,
        AblationKind::TwoStageDsaeRf,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AblationKind::DsaeOnly => "dsae-only",
            AblationKind::SaeSoftmax => "sae-softmax",
            AblationKind::SaeRf => "sae-rf",
            AblationKind::TwoStageSoftmax => "two-stage-softmax",
            AblationKind::TwoStageDsaeRf => "two-stage-dsae-rf",
        }
    }
}

impl std::str::FromStr for AblationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AblationKind::ALL
            .iter()
            .find(|k| k.as_str() == s)
            .copied()
            .ok_or_else(|| Error::InvalidConfig {
                detail: format!(
                    "unknown ablation `{s}` (expected one of: {})",
                    AblationKind::ALL.map(|k| k.as_str()).join(", ")
                ),
            })
    }
}

impl std::fmt::Display for AblationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A trained model of any ablation variant.
#[derive(Debug, Clone)]
pub enum AblationModel {
    DsaeOnly {
        normalizer: Normalizer,
        dsae: StackedAutoencoder,
        threshold: f64,
    },
    SaeSoftmax(StageOneModel),
    SaeRf {
        normalizer: Normalizer,
        dsae: StackedAutoencoder,
        forest: ForestModel,
    },
    TwoStageSoftmax {
        stage1: StageOneModel,
        stage2_dsae: StackedAutoencoder,
        stage2_head: SoftmaxHead,
        append_both: bool,
    },
    TwoStageDsaeRf(Box<PipelineModel>),
}

impl AblationModel {
    pub fn kind(&self) -> AblationKind {
        match self {
            AblationModel::DsaeOnly { .. } => AblationKind::DsaeOnly,
            AblationModel::SaeSoftmax(_) => AblationKind::SaeSoftmax,
            AblationModel::SaeRf { .. } => AblationKind::SaeRf,
            AblationModel::TwoStageSoftmax { .. } => AblationKind::TwoStageSoftmax,
            AblationModel::TwoStageDsaeRf(_) => AblationKind::TwoStageDsaeRf,
        }
    }

    /// The fitted normalizer, whichever variant holds it.
    pub fn normalizer(&self) -> &Normalizer {
        match self {
            AblationModel::DsaeOnly { normalizer, .. } => normalizer,
            AblationModel::SaeSoftmax(s1) => s1.normalizer(),
            AblationModel::SaeRf { normalizer, .. } => normalizer,
            AblationModel::TwoStageSoftmax { stage1, .. } => stage1.normalizer(),
            AblationModel::TwoStageDsaeRf(model) => model.stage1().normalizer(),
        }
    }

    /// Binary attack predictions for raw (un-normalized) features.
    pub fn predict_binary(&self, x: &FeatureMatrix) -> Result<Vec<u8>> {
        match self {
            AblationModel::DsaeOnly {
                normalizer,
                dsae,
                threshold,
            } => {
                let xn = normalizer.apply(x)?;
                let errors = dsae.reconstruction_errors(&xn)?;
                Ok(errors.iter().map(|&e| u8::from(e > *threshold)).collect())
            }
            AblationModel::SaeSoftmax(s1) => {
                let xn = s1.normalizer().apply(x)?;
                let proba = s1.probabilities_normalized(&xn)?;
                Ok(argmax_rows(&proba).iter().map(|&c| c as u8).collect())
            }
            AblationModel::SaeRf {
                normalizer,
                dsae,
                forest,
            } => {
                let xn = normalizer.apply(x)?;
                let encoded = dsae.encode(&xn)?;
                Ok(forest.predict(&encoded)?.iter().map(|&c| c as u8).collect())
            }
            AblationModel::TwoStageSoftmax {
                stage1,
                stage2_dsae,
                stage2_head,
                append_both,
            } => {
                let xn = stage1.normalizer().apply(x)?;
                let proba = stage1.probabilities_normalized(&xn)?;
                let augmented = augment(&xn, &proba, *append_both)?;
                let p2 = predict_proba(stage2_dsae, stage2_head, &augmented)?;
                Ok(argmax_rows(&p2).iter().map(|&c| c as u8).collect())
            }
            AblationModel::TwoStageDsaeRf(model) => model.predict_binary(x),
        }
    }
}

/// Pick the reconstruction-error threshold that maximizes training f1
/// (attack = error above threshold). Candidates are a value below the
/// minimum plus the midpoints between consecutive distinct errors; ties
/// keep the lowest threshold.
fn threshold_max_f1(errors: &[f64], binary: &[u8]) -> f64 {
    debug_assert_eq!(errors.len(), binary.len());
    let mut pairs: Vec<(f64, u8)> = errors.iter().copied().zip(binary.iter().copied()).collect();
    pairs.sort_by(|a, b| f64::total_cmp(&a.0, &b.0));
    let total_attack: u64 = pairs.iter().map(|&(_, y)| u64::from(y)).sum();

    // Attacks at or above each suffix start.
    let n = pairs.len();
    let mut suffix_attack = vec![0u64; n + 1];
    for i in (0..n).rev() {
        suffix_attack[i] = suffix_attack[i + 1] + u64::from(pairs[i].1);
    }

    let f1_for = |suffix_start: usize| -> f64 {
        let predicted = (n - suffix_start) as u64;
        let tp = suffix_attack[suffix_start];
        let fp = predicted - tp;
        let fn_count = total_attack - tp;
        let den = 2 * tp + fp + fn_count;
        if den == 0 {
            0.0
        } else {
            2.0 * tp as f64 / den as f64
        }
    };

    let mut best_threshold = pairs[0].0 - 1.0; // everything predicted attack
    let mut best_f1 = f1_for(0);
    for i in 0..n - 1 {
        let (v, next) = (pairs[i].0, pairs[i + 1].0);
        if v == next {
            continue;
        }
        let f1 = f1_for(i + 1);
        if f1 > best_f1 {
            best_f1 = f1;
            best_threshold = v + (next - v) / 2.0;
        }
    }
    best_threshold
}

/// Train the requested ablation variant on the full given data.
pub fn train_ablation(
    kind: AblationKind,
    x: &FeatureMatrix,
    labels: &LabelColumn,
    schema: &DatasetSchema,
    cfg: &PipelineConfig,
) -> Result<AblationModel> {
    let root = RandomSource::new(cfg.seed);
    match kind {
        AblationKind::TwoStageDsaeRf => Ok(AblationModel::TwoStageDsaeRf(Box::new(
            train_pipeline(x, labels, schema, cfg)?,
        ))),
        AblationKind::SaeSoftmax => {
            Ok(AblationModel::SaeSoftmax(fit_stage_one(x, labels, cfg, &root)?))
        }
        AblationKind::DsaeOnly => {
            let normalizer = Normalizer::fit(x, cfg.normalizer_mode)?;
            let xn = normalizer.apply(x)?;
            let mut init_rng = root.child(streams::STAGE1_INIT);
            let mut dsae = StackedAutoencoder::init(
                xn.cols(),
                &cfg.stage1_hidden,
                Activation::Relu,
                cfg.decoder_activation,
                cfg.init_scale,
                &mut init_rng,
            )?;
            dsae.pretrain(
                &xn,
                &cfg.train_config(
                    cfg.pretrain_epochs,
                    root.child(streams::STAGE1_PRETRAIN).seed(),
                ),
            )
            .map_err(|e| e.with_stage("reconstruction-threshold pretraining"))?;
            let errors = dsae.reconstruction_errors(&xn)?;
            let threshold = threshold_max_f1(&errors, labels.binary());
            Ok(AblationModel::DsaeOnly {
                normalizer,
                dsae,
                threshold,
            })
        }
        AblationKind::SaeRf => {
            let normalizer = Normalizer::fit(x, cfg.normalizer_mode)?;
            let xn = normalizer.apply(x)?;
            let mut init_rng = root.child(streams::STAGE1_INIT);
            let mut dsae = StackedAutoencoder::init(
                xn.cols(),
                &cfg.stage1_hidden,
                Activation::Relu,
                cfg.decoder_activation,
                cfg.init_scale,
                &mut init_rng,
            )?;
            dsae.pretrain(
                &xn,
                &cfg.train_config(
                    cfg.pretrain_epochs,
                    root.child(streams::STAGE1_PRETRAIN).seed(),
                ),
            )
            .map_err(|e| e.with_stage("encoder pretraining"))?;
            let encoded = dsae.encode(&xn)?;
            let binary: Vec<u32> = labels.binary().iter().map(|&b| u32::from(b)).collect();
            let forest = train_forest(
                &encoded,
                &binary,
                &cfg.forest_config(root.child(streams::FOREST).seed()),
            )?;
            Ok(AblationModel::SaeRf {
                normalizer,
                dsae,
                forest,
            })
        }
        AblationKind::TwoStageSoftmax => {
            let stage1 = fit_stage_one(x, labels, cfg, &root)?;
            let xn = stage1.normalizer().apply(x)?;
            let proba = stage1.probabilities_normalized(&xn)?;
            let augmented = augment(&xn, &proba, cfg.append_both_probabilities)?;

            let mut init_rng = root.child(streams::STAGE2_INIT);
            let mut stage2_dsae = StackedAutoencoder::init(
                augmented.cols(),
                &cfg.stage2_hidden,
                Activation::Relu,
                cfg.decoder_activation,
                cfg.init_scale,
                &mut init_rng,
            )?;
            stage2_dsae
                .pretrain(
                    &augmented,
                    &cfg.train_config(
                        cfg.pretrain_epochs,
                        root.child(streams::STAGE2_PRETRAIN).seed(),
                    ),
                )
                .map_err(|e| e.with_stage("stage-2 pretraining"))?;
            let mut head_rng = root.child(streams::STAGE2_HEAD);
            let mut stage2_head =
                SoftmaxHead::init(stage2_dsae.output_dim(), 2, cfg.init_scale, &mut head_rng)?;
            let binary: Vec<u32> = labels.binary().iter().map(|&b| u32::from(b)).collect();
            finetune_supervised(
                &mut stage2_dsae,
                &mut stage2_head,
                &augmented,
                &binary,
                &cfg.train_config(
                    cfg.finetune_epochs,
                    root.child(streams::STAGE2_FINETUNE).seed(),
                ),
                cfg.head_only_finetune,
            )
            .map_err(|e| e.with_stage("stage-2 fine-tuning"))?;
            Ok(AblationModel::TwoStageSoftmax {
                stage1,
                stage2_dsae,
                stage2_head,
                append_both: cfg.append_both_probabilities,
            })
        }
    }
}

/// Deterministic stratified split into (train, test) index sets.
pub(crate) fn stratified_holdout(
    binary: &[u8],
    test_fraction: f64,
    rng: &mut RandomSource,
) -> (Vec<usize>, Vec<usize>) {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [0u8, 1u8] {
        let mut idx: Vec<usize> = (0..binary.len()).filter(|&i| binary[i] == class).collect();
        rng.shuffle(&mut idx);
        let n_test = ((idx.len() as f64) * test_fraction).round() as usize;
        let n_test = n_test.min(idx.len().saturating_sub(1)).max(1.min(idx.len()));
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Train one ablation variant on a stratified 80/20 holdout split,
/// returning the trained model together with its metrics on the held-out
/// 20%.
pub fn train_holdout(
    x: &FeatureMatrix,
    labels: &LabelColumn,
    schema: &DatasetSchema,
    cfg: &PipelineConfig,
    kind: AblationKind,
) -> Result<(AblationModel, MetricsReport)> {
    let mut split_rng = RandomSource::new(cfg.seed).child(streams::HOLDOUT);
    let (train_idx, test_idx) = stratified_holdout(labels.binary(), 0.2, &mut split_rng);
    let train_x = x.select_rows(&train_idx);
    let train_labels = labels.select(&train_idx);
    let model = train_ablation(kind, &train_x, &train_labels, schema, cfg)?;

    let test_x = x.select_rows(&test_idx);
    let predicted = model.predict_binary(&test_x)?;
    let truth: Vec<u8> = test_idx.iter().map(|&i| labels.binary()[i]).collect();
    let report = compute_metrics(ConfusionCounts::from_predictions(&predicted, &truth));
    Ok((model, report))
}

/// Holdout evaluation of one ablation variant; metrics only.
pub fn run_ablation(
    x: &FeatureMatrix,
    labels: &LabelColumn,
    schema: &DatasetSchema,
    cfg: &PipelineConfig,
    kind: AblationKind,
) -> Result<MetricsReport> {
    train_holdout(x, labels, schema, cfg, kind).map(|(_, report)| report)
}
