//! The two-stage model: stage 1 turns flow features into an attack
//! probability through a stacked autoencoder and softmax head; that
//! probability is appended to the features and stage 2 encodes the
//! augmented matrix through a second stacked autoencoder whose output a
//! random forest classifies.

mod ablation;
mod bundle;
mod crossval;

pub use ablation::{run_ablation, train_ablation, train_holdout, AblationKind, AblationModel};
pub use bundle::{load_model, model_from_bytes, model_to_bytes, save_model, FORMAT_VERSION};
pub use crossval::{
    cross_validate, cross_validate_with, stratified_fold_assignment, CrossValReport, FoldView,
    N_FOLDS,
};

use serde::{Deserialize, Serialize};

use crate::data::{DatasetSchema, FeatureMatrix, LabelColumn};
use crate::error::{Error, Result};
use crate::forest::{train_forest, ForestConfig, ForestModel};
use crate::nn::{
    finetune_supervised, predict_proba, Activation, SoftmaxHead, StackedAutoencoder, TrainConfig,
};
use crate::preprocess::{Normalizer, NormalizerMode};
use crate::random::RandomSource;

// Child-stream labels for the root seed; fixed so every component's
// randomness is independent of the others.
pub(crate) mod streams {
    pub const STAGE1_INIT: u64 = 1;
    pub const STAGE1_PRETRAIN: u64 = 2;
    pub const STAGE1_HEAD: u64 = 3;
    pub const STAGE1_FINETUNE: u64 = 4;
    pub const STAGE2_INIT: u64 = 5;
    pub const STAGE2_PRETRAIN: u64 = 6;
    pub const STAGE2_HEAD: u64 = 7;
    pub const STAGE2_FINETUNE: u64 = 8;
    pub const FOREST: u64 = 9;
    pub const HOLDOUT: u64 = 10;
    pub const CROSSVAL: u64 = 11;
}

/// What the final classifier is trained against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetMode {
    /// Normal vs attack.
    #[default]
    Binary,
    /// The raw multi-class labels.
    Multiclass,
}

impl std::str::FromStr for TargetMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(TargetMode::Binary),
            "multiclass" => Ok(TargetMode::Multiclass),
            other => Err(Error::InvalidConfig {
                detail: format!("unknown target mode `{other}` (expected binary|multiclass)"),
            }),
        }
    }
}

/// Everything needed to train the pipeline; embedded verbatim in model
/// bundles and reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed: u64,
    pub normalizer_mode: NormalizerMode,
    pub stage1_hidden: Vec<usize>,
    pub stage2_hidden: Vec<usize>,
    pub learning_rate: f64,
    pub pretrain_epochs: usize,
    pub finetune_epochs: usize,
    pub batch_size: usize,
    pub init_scale: f64,
    pub decoder_activation: Activation,
    /// Freeze encoder layers during fine-tuning; only the head learns.
    pub head_only_finetune: bool,
    /// Append both class probabilities instead of just P(attack). The
    /// second column is affinely dependent on the first, so this is off
    /// by default.
    pub append_both_probabilities: bool,
    /// Feed the forest the raw augmented features instead of the stage-2
    /// encoding.
    pub forest_on_raw_augmented: bool,
    pub target: TargetMode,
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub feature_subset_size: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            normalizer_mode: NormalizerMode::Standard,
            stage1_hidden: vec![64, 32],
            stage2_hidden: vec![64, 32],
            learning_rate: 0.01,
            pretrain_epochs: 50,
            finetune_epochs: 50,
            batch_size: 64,
            init_scale: 1.0,
            decoder_activation: Activation::Linear,
            head_only_finetune: false,
            append_both_probabilities: false,
            forest_on_raw_augmented: false,
            target: TargetMode::Binary,
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            feature_subset_size: None,
        }
    }
}

impl PipelineConfig {
    pub(crate) fn train_config(&self, epochs: usize, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            epochs,
            batch_size: self.batch_size,
            seed,
            init_scale: self.init_scale,
        }
    }

    pub(crate) fn forest_config(&self, seed: u64) -> ForestConfig {
        ForestConfig {
            n_trees: self.n_trees,
            max_depth: self.max_depth,
            min_samples_split: self.min_samples_split,
            feature_subset_size: self.feature_subset_size,
            bootstrap: true,
            seed,
        }
    }

    /// Copy with a different root seed; used per cross-validation fold.
    pub(crate) fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

/// Stage 1: normalizer, stacked encoder, and the two-class softmax head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageOneModel {
    normalizer: Normalizer,
    dsae: StackedAutoencoder,
    head: SoftmaxHead,
}

impl StageOneModel {
    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    pub fn dsae(&self) -> &StackedAutoencoder {
        &self.dsae
    }

    pub fn head(&self) -> &SoftmaxHead {
        &self.head
    }

    /// P(attack) per row of raw (un-normalized) features.
    pub fn attack_probabilities(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        let xn = self.normalizer.apply(x)?;
        self.attack_probabilities_normalized(&xn)
    }

    /// P(attack) per row of already-normalized features. Training and
    /// prediction both go through this path, so the appended column is
    /// bit-identical between them.
    pub(crate) fn attack_probabilities_normalized(&self, xn: &FeatureMatrix) -> Result<Vec<f64>> {
        let proba = predict_proba(&self.dsae, &self.head, xn)?;
        Ok((0..proba.rows()).map(|r| proba.get(r, 1)).collect())
    }

    pub(crate) fn probabilities_normalized(&self, xn: &FeatureMatrix) -> Result<FeatureMatrix> {
        predict_proba(&self.dsae, &self.head, xn)
    }
}

/// Stage 2: stacked encoder over the augmented features plus the forest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTwoModel {
    dsae: StackedAutoencoder,
    forest: ForestModel,
}

impl StageTwoModel {
    pub fn dsae(&self) -> &StackedAutoencoder {
        &self.dsae
    }

    pub fn forest(&self) -> &ForestModel {
        &self.forest
    }
}

/// The sealed two-stage model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineModel {
    schema: DatasetSchema,
    stage1: StageOneModel,
    stage2: StageTwoModel,
    config: PipelineConfig,
    benign_code: u32,
}

impl PipelineModel {
    pub fn schema(&self) -> &DatasetSchema {
        &self.schema
    }

    pub fn stage1(&self) -> &StageOneModel {
        &self.stage1
    }

    pub fn stage2(&self) -> &StageTwoModel {
        &self.stage2
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn benign_code(&self) -> u32 {
        self.benign_code
    }

    /// Class codes plus the stage-1 attack probability per row. In
    /// binary target mode codes are 0 = normal, 1 = attack; in
    /// multiclass mode they are raw label codes from the schema.
    pub fn predict(&self, x: &FeatureMatrix) -> Result<(Vec<u32>, Vec<f64>)> {
        if x.cols() != self.schema.n_features() {
            return Err(Error::DimensionMismatch {
                context: "prediction input features".into(),
                expected: self.schema.n_features(),
                found: x.cols(),
            });
        }
        let xn = self.stage1.normalizer.apply(x)?;
        let proba = self.stage1.probabilities_normalized(&xn)?;
        let p_attack: Vec<f64> = (0..proba.rows()).map(|r| proba.get(r, 1)).collect();
        let augmented = augment(&xn, &proba, self.config.append_both_probabilities)?;
        let forest_input = if self.config.forest_on_raw_augmented {
            augmented
        } else {
            self.stage2.dsae.encode(&augmented)?
        };
        let codes = self.stage2.forest.predict(&forest_input)?;
        Ok((codes, p_attack))
    }

    /// Predictions reduced to the binary attack flag.
    pub fn predict_binary(&self, x: &FeatureMatrix) -> Result<Vec<u8>> {
        let (codes, _) = self.predict(x)?;
        Ok(match self.config.target {
            TargetMode::Binary => codes.iter().map(|&c| c as u8).collect(),
            TargetMode::Multiclass => codes
                .iter()
                .map(|&c| u8::from(c != self.benign_code))
                .collect(),
        })
    }

    /// Decode a predicted class code to a display label.
    pub fn class_label(&self, code: u32) -> String {
        match self.config.target {
            TargetMode::Binary => {
                if code == 0 {
                    "normal".to_string()
                } else {
                    "attack".to_string()
                }
            }
            TargetMode::Multiclass => self
                .schema
                .label_map()
                .name_of(code)
                .unwrap_or("unknown")
                .to_string(),
        }
    }
}

/// Append stage-1 probabilities to the normalized features: P(attack)
/// always, P(normal) too when `both` is set.
pub(crate) fn augment(
    xn: &FeatureMatrix,
    proba: &FeatureMatrix,
    both: bool,
) -> Result<FeatureMatrix> {
    let p_attack: Vec<f64> = (0..proba.rows()).map(|r| proba.get(r, 1)).collect();
    let mut out = xn.hstack(&FeatureMatrix::from_column(&p_attack))?;
    if both {
        let p_normal: Vec<f64> = (0..proba.rows()).map(|r| proba.get(r, 0)).collect();
        out = out.hstack(&FeatureMatrix::from_column(&p_normal))?;
    }
    Ok(out)
}

fn check_training_inputs(x: &FeatureMatrix, labels: &LabelColumn) -> Result<()> {
    if x.rows() == 0 {
        return Err(Error::EmptyInput {
            context: "training data".into(),
        });
    }
    if labels.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            context: "training labels".into(),
            expected: x.rows(),
            found: labels.len(),
        });
    }
    let attacks = labels.binary().iter().filter(|&&b| b == 1).count();
    if attacks == 0 || attacks == labels.len() {
        return Err(Error::InvalidData {
            detail: "training data needs both normal and attack rows".into(),
        });
    }
    Ok(())
}

/// Fit the normalizer and the full stage-1 model (pretrain + supervised
/// fine-tune against the binary labels).
pub(crate) fn fit_stage_one(
    x: &FeatureMatrix,
    labels: &LabelColumn,
    cfg: &PipelineConfig,
    root: &RandomSource,
) -> Result<StageOneModel> {
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
        &cfg.train_config(cfg.pretrain_epochs, root.child(streams::STAGE1_PRETRAIN).seed()),
    )
    .map_err(|e| e.with_stage("stage-1 pretraining"))?;

    let mut head_rng = root.child(streams::STAGE1_HEAD);
    let mut head = SoftmaxHead::init(dsae.output_dim(), 2, cfg.init_scale, &mut head_rng)?;
    let binary: Vec<u32> = labels.binary().iter().map(|&b| u32::from(b)).collect();
    finetune_supervised(
        &mut dsae,
        &mut head,
        &xn,
        &binary,
        &cfg.train_config(cfg.finetune_epochs, root.child(streams::STAGE1_FINETUNE).seed()),
        cfg.head_only_finetune,
    )
    .map_err(|e| e.with_stage("stage-1 fine-tuning"))?;

    Ok(StageOneModel {
        normalizer,
        dsae,
        head,
    })
}

/// Fit stage 2 given a trained stage 1: pretrain the second stack on the
/// probability-augmented matrix (no supervised fine-tune; the forest
/// supplies the supervision) and train the forest on its encoding.
pub(crate) fn fit_stage_two(
    stage1: &StageOneModel,
    x: &FeatureMatrix,
    labels: &LabelColumn,
    cfg: &PipelineConfig,
    root: &RandomSource,
) -> Result<StageTwoModel> {
    let xn = stage1.normalizer.apply(x)?;
    let proba = stage1.probabilities_normalized(&xn)?;
    let augmented = augment(&xn, &proba, cfg.append_both_probabilities)?;

    let mut init_rng = root.child(streams::STAGE2_INIT);
    let mut dsae = StackedAutoencoder::init(
        augmented.cols(),
        &cfg.stage2_hidden,
        Activation::Relu,
        cfg.decoder_activation,
        cfg.init_scale,
        &mut init_rng,
    )?;
    dsae.pretrain(
        &augmented,
        &cfg.train_config(cfg.pretrain_epochs, root.child(streams::STAGE2_PRETRAIN).seed()),
    )
    .map_err(|e| e.with_stage("stage-2 pretraining"))?;

    let forest_input = if cfg.forest_on_raw_augmented {
        augmented
    } else {
        dsae.encode(&augmented)?
    };
    let targets: Vec<u32> = match cfg.target {
        TargetMode::Binary => labels.binary().iter().map(|&b| u32::from(b)).collect(),
        TargetMode::Multiclass => labels.raw().to_vec(),
    };
    let forest = train_forest(
        &forest_input,
        &targets,
        &cfg.forest_config(root.child(streams::FOREST).seed()),
    )?;
    Ok(StageTwoModel { dsae, forest })
}

/// Train the full two-stage model.
pub fn train_pipeline(
    x: &FeatureMatrix,
    labels: &LabelColumn,
    schema: &DatasetSchema,
    cfg: &PipelineConfig,
) -> Result<PipelineModel> {
    check_training_inputs(x, labels)?;
    if x.cols() != schema.n_features() {
        return Err(Error::DimensionMismatch {
            context: "training features vs schema".into(),
            expected: schema.n_features(),
            found: x.cols(),
        });
    }
    let root = RandomSource::new(cfg.seed);
    let stage1 = fit_stage_one(x, labels, cfg, &root)?;
    let stage2 = fit_stage_two(&stage1, x, labels, cfg, &root)?;
    Ok(PipelineModel {
        schema: schema.clone(),
        stage1,
        stage2,
        config: cfg.clone(),
        benign_code: labels.benign_code(),
    })
}
