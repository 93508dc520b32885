//! Stratified 10-fold cross-validation over any ablation variant.
//!
//! Folds are assigned by dealing each class's shuffled rows round-robin,
//! so per-fold class proportions stay within one sample of the global
//! proportion and every row lands in exactly one test fold. Each fold
//! trains the full configured pipeline (normalizer included) on the nine
//! training chunks only.

use serde::{Deserialize, Serialize};

use crate::data::{DatasetSchema, FeatureMatrix, LabelColumn};
use crate::error::{Error, Result};
use crate::metrics::{compute_metrics, ConfusionCounts, MetricsReport, MetricsSummary};
use crate::pipeline::ablation::{train_ablation, AblationKind, AblationModel};
use crate::pipeline::{streams, PipelineConfig};
use crate::random::RandomSource;

/// Chunk count of the cross-validation protocol.
pub const N_FOLDS: usize = 10;

/// Per-fold metrics with their mean/std summary and a digest of the fold
/// assignment for reproducibility checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValReport {
    pub folds: Vec<MetricsReport>,
    pub mean: MetricsSummary,
    pub std: MetricsSummary,
    pub fold_digest: String,
}

/// What an observer sees after each fold is trained and evaluated.
pub struct FoldView<'a> {
    pub fold: usize,
    pub model: &'a AblationModel,
    pub train_indices: &'a [usize],
    pub test_indices: &'a [usize],
}

/// Deterministic stratified fold assignment: entry i is the fold of row
/// i. Errors when any class in the binary view has fewer rows than
/// folds.
pub fn stratified_fold_assignment(
    binary: &[u8],
    n_folds: usize,
    rng: &mut RandomSource,
) -> Result<Vec<usize>> {
    let mut assignment = vec![0usize; binary.len()];
    for class in [0u8, 1u8] {
        let mut idx: Vec<usize> = (0..binary.len()).filter(|&i| binary[i] == class).collect();
        if idx.len() < n_folds {
            return Err(Error::InvalidData {
                detail: format!(
                    "class {class} has {} rows, need at least {n_folds} for stratified folds",
                    idx.len()
                ),
            });
        }
        rng.shuffle(&mut idx);
        for (pos, &row) in idx.iter().enumerate() {
            assignment[row] = pos % n_folds;
        }
    }
    Ok(assignment)
}

fn fnv1a(bytes: impl Iterator<Item = u8>) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

/// Ten-fold stratified cross-validation of the given ablation variant.
pub fn cross_validate(
    x: &FeatureMatrix,
    labels: &LabelColumn,
    schema: &DatasetSchema,
    cfg: &PipelineConfig,
    kind: AblationKind,
) -> Result<CrossValReport> {
    cross_validate_with(x, labels, schema, cfg, kind, |_| Ok(()))
}

/// Like [`cross_validate`] but invoking `observer` on every trained
/// fold; used by verification harnesses to check leakage and coverage.
pub fn cross_validate_with<F>(
    x: &FeatureMatrix,
    labels: &LabelColumn,
    schema: &DatasetSchema,
    cfg: &PipelineConfig,
    kind: AblationKind,
    mut observer: F,
) -> Result<CrossValReport>
where
    F: FnMut(FoldView<'_>) -> Result<()>,
{
    if labels.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            context: "cross-validation labels".into(),
            expected: x.rows(),
            found: labels.len(),
        });
    }
    let root = RandomSource::new(cfg.seed).child(streams::CROSSVAL);
    let assignment = stratified_fold_assignment(labels.binary(), N_FOLDS, &mut root.child(0))?;
    let fold_digest = format!("{:016x}", fnv1a(assignment.iter().map(|&f| f as u8)));

    let mut folds = Vec::with_capacity(N_FOLDS);
    for fold in 0..N_FOLDS {
        let test_idx: Vec<usize> = (0..x.rows()).filter(|&i| assignment[i] == fold).collect();
        let train_idx: Vec<usize> = (0..x.rows()).filter(|&i| assignment[i] != fold).collect();

        let train_x = x.select_rows(&train_idx);
        let train_labels = labels.select(&train_idx);
        let fold_cfg = cfg.with_seed(root.child(1 + fold as u64).seed());
        let model = train_ablation(kind, &train_x, &train_labels, schema, &fold_cfg)?;

        let test_x = x.select_rows(&test_idx);
        let predicted = model.predict_binary(&test_x)?;
        let truth: Vec<u8> = test_idx.iter().map(|&i| labels.binary()[i]).collect();
        folds.push(compute_metrics(ConfusionCounts::from_predictions(
            &predicted, &truth,
        )));

        observer(FoldView {
            fold,
            model: &model,
            train_indices: &train_idx,
            test_indices: &test_idx,
        })?;
    }

    Ok(CrossValReport {
        mean: MetricsSummary::mean_of(&folds),
        std: MetricsSummary::std_of(&folds),
        folds,
        fold_digest,
    })
}
