//! Resolved run configuration: defaults, then config file, then flags.
//! The resolved snapshot is embedded in every report and travels inside
//! model bundles via the pipeline config.

use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use serde::{Deserialize, Serialize};

use saeforest::ingest::{ImputeMode, IngestOptions};
use saeforest::nn::Activation;
use saeforest::pipeline::{AblationKind, PipelineConfig, TargetMode};
use saeforest::preprocess::NormalizerMode;

/// Fully resolved, serializable run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct RunConfig {
    pub label_column: String,
    pub benign_class: String,
    pub normalizer: NormalizerMode,
    pub impute: ImputeMode,
    pub seed: u64,
    pub stage1_hidden: Vec<usize>,
    pub stage2_hidden: Vec<usize>,
    pub learning_rate: f64,
    pub pretrain_epochs: usize,
    pub finetune_epochs: usize,
    pub batch_size: usize,
    pub init_scale: f64,
    pub head_only_finetune: bool,
    pub append_both_probabilities: bool,
    pub forest_on_raw_augmented: bool,
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub feature_subset_size: Option<usize>,
    pub ablation: AblationKind,
    pub target: TargetMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = PipelineConfig::default();
        Self {
            label_column: "Label".to_string(),
            benign_class: "BENIGN".to_string(),
            normalizer: p.normalizer_mode,
            impute: ImputeMode::Zero,
            seed: p.seed,
            stage1_hidden: p.stage1_hidden,
            stage2_hidden: p.stage2_hidden,
            learning_rate: p.learning_rate,
            pretrain_epochs: p.pretrain_epochs,
            finetune_epochs: p.finetune_epochs,
            batch_size: p.batch_size,
            init_scale: p.init_scale,
            head_only_finetune: p.head_only_finetune,
            append_both_probabilities: p.append_both_probabilities,
            forest_on_raw_augmented: p.forest_on_raw_augmented,
            n_trees: p.n_trees,
            max_depth: p.max_depth,
            min_samples_split: p.min_samples_split,
            feature_subset_size: p.feature_subset_size,
            ablation: AblationKind::TwoStageDsaeRf,
            target: p.target,
        }
    }
}

/// Flags shared by the data/training commands. Every field is optional;
/// unset fields fall back to the config file, then to defaults.
#[derive(Debug, Clone, Args)]
pub struct ModelFlags {
    /// JSON config file; explicit flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Seed for every stochastic component of the run.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Name of the class column.
    #[arg(long)]
    pub label_column: Option<String>,

    /// Class treated as normal traffic; everything else is an attack.
    #[arg(long)]
    pub benign_class: Option<String>,

    /// Feature scaling: standard ([0,1]) or paper-literal ([-1,0]).
    #[arg(long, value_parser = ["standard", "paper-literal"])]
    pub normalizer: Option<String>,

    /// Handling of Infinity/NaN cells: zero, median, or drop.
    #[arg(long, value_parser = ["zero", "median", "drop"])]
    pub impute: Option<String>,

    /// Model variant to train.
    #[arg(long, value_parser = [
        "dsae-only", "sae-softmax", "sae-rf", "two-stage-softmax", "two-stage-dsae-rf",
    ])]
    pub ablation: Option<String>,

    /// Final classification target.
    #[arg(long, value_parser = ["binary", "multiclass"])]
    pub target: Option<String>,

    /// Stage-1 hidden layer widths, comma separated (e.g. 64,32).
    #[arg(long, value_delimiter = ',')]
    pub stage1_hidden: Option<Vec<usize>>,

    /// Stage-2 hidden layer widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub stage2_hidden: Option<Vec<usize>>,

    #[arg(long)]
    pub learning_rate: Option<f64>,

    #[arg(long)]
    pub pretrain_epochs: Option<usize>,

    #[arg(long)]
    pub finetune_epochs: Option<usize>,

    #[arg(long)]
    pub batch_size: Option<usize>,

    #[arg(long)]
    pub n_trees: Option<usize>,

    #[arg(long)]
    pub max_depth: Option<usize>,

    #[arg(long)]
    pub min_samples_split: Option<usize>,

    /// Features drawn per split; defaults to floor(sqrt(n_features)).
    #[arg(long)]
    pub feature_subset_size: Option<usize>,
}

impl RunConfig {
    /// defaults <- config file <- flags.
    pub fn resolve(flags: &ModelFlags) -> anyhow::Result<Self> {
        let mut cfg = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config file {}", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing config file {}", path.display()))?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = flags.seed {
            cfg.seed = v;
        }
        if let Some(v) = &flags.label_column {
            cfg.label_column = v.clone();
        }
        if let Some(v) = &flags.benign_class {
            cfg.benign_class = v.clone();
        }
        if let Some(v) = &flags.normalizer {
            cfg.normalizer = v.parse()?;
        }
        if let Some(v) = &flags.impute {
            cfg.impute = v.parse()?;
        }
        if let Some(v) = &flags.ablation {
            cfg.ablation = v.parse()?;
        }
        if let Some(v) = &flags.target {
            cfg.target = v.parse()?;
        }
        if let Some(v) = &flags.stage1_hidden {
            cfg.stage1_hidden = v.clone();
        }
        if let Some(v) = &flags.stage2_hidden {
            cfg.stage2_hidden = v.clone();
        }
        if let Some(v) = flags.learning_rate {
            cfg.learning_rate = v;
        }
        if let Some(v) = flags.pretrain_epochs {
            cfg.pretrain_epochs = v;
        }
        if let Some(v) = flags.finetune_epochs {
            cfg.finetune_epochs = v;
        }
        if let Some(v) = flags.batch_size {
            cfg.batch_size = v;
        }
        if let Some(v) = flags.n_trees {
            cfg.n_trees = v;
        }
        if let Some(v) = flags.max_depth {
            cfg.max_depth = Some(v);
        }
        if let Some(v) = flags.min_samples_split {
            cfg.min_samples_split = v;
        }
        if let Some(v) = flags.feature_subset_size {
            cfg.feature_subset_size = Some(v);
        }
        Ok(cfg)
    }

    pub fn ingest_options(&self) -> IngestOptions {
        IngestOptions {
            label_column: self.label_column.clone(),
            benign_class: self.benign_class.clone(),
            impute: self.impute,
        }
    }

    pub fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            seed: self.seed,
            normalizer_mode: self.normalizer,
            stage1_hidden: self.stage1_hidden.clone(),
            stage2_hidden: self.stage2_hidden.clone(),
            learning_rate: self.learning_rate,
            pretrain_epochs: self.pretrain_epochs,
            finetune_epochs: self.finetune_epochs,
            batch_size: self.batch_size,
            init_scale: self.init_scale,
            decoder_activation: Activation::Linear,
            head_only_finetune: self.head_only_finetune,
            append_both_probabilities: self.append_both_probabilities,
            forest_on_raw_augmented: self.forest_on_raw_augmented,
            target: self.target,
            n_trees: self.n_trees,
            max_depth: self.max_depth,
            min_samples_split: self.min_samples_split,
            feature_subset_size: self.feature_subset_size,
        }
    }

    pub fn ablation_kind(&self) -> AblationKind {
        self.ablation
    }
}
