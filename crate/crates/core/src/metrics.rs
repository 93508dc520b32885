//! Confusion counts and the four evaluation metrics.
//!
//! Attack is the positive class: a true positive is an attack row
//! predicted as attack. Zero denominators follow the usual convention
//! (precision 0 when tp+fp = 0, recall 0 when tp+fn = 0, f1 0 when
//! precision + recall = 0) so degenerate classifiers never crash the
//! evaluation.

use serde::{Deserialize, Serialize};

/// Raw confusion-matrix counts for a binary evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_count: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_count
    }

    /// Tally predictions against truth; both use 1 = attack, 0 = normal.
    pub fn from_predictions(predicted: &[u8], truth: &[u8]) -> Self {
        debug_assert_eq!(predicted.len(), truth.len());
        let mut c = ConfusionCounts::default();
        for (&p, &t) in predicted.iter().zip(truth) {
            match (p != 0, t != 0) {
                (true, true) => c.tp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_count += 1,
            }
        }
        c
    }
}

/// Accuracy, precision, recall, and f1 derived from one confusion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub counts: ConfusionCounts,
}

/// Divide two exact integer counts, mapping 0/0 to 0.
fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Compute the four metrics from confusion counts.
///
/// Each metric is a single division of two integer counts, so the result
/// is the correctly rounded value of the exact rational. f1 uses the
/// identity 2PR/(P+R) = 2tp/(2tp + fp + fn), which avoids compounding
/// rounding through P and R while being algebraically the same quantity.
pub fn compute_metrics(counts: ConfusionCounts) -> MetricsReport {
    let ConfusionCounts {
        tp,
        tn,
        fp,
        fn_count,
    } = counts;
    MetricsReport {
        accuracy: ratio(tp + tn, tp + tn + fp + fn_count),
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_count),
        f1: ratio(2 * tp, 2 * tp + fp + fn_count),
        counts,
    }
}

/// Mean and standard deviation of one metric across folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl MetricsSummary {
    pub fn mean_of(reports: &[MetricsReport]) -> Self {
        let n = reports.len().max(1) as f64;
        Self {
            accuracy: reports.iter().map(|r| r.accuracy).sum::<f64>() / n,
            precision: reports.iter().map(|r| r.precision).sum::<f64>() / n,
            recall: reports.iter().map(|r| r.recall).sum::<f64>() / n,
            f1: reports.iter().map(|r| r.f1).sum::<f64>() / n,
        }
    }

    pub fn std_of(reports: &[MetricsReport]) -> Self {
        let mean = Self::mean_of(reports);
        let n = reports.len().max(1) as f64;
        let var = |f: &dyn Fn(&MetricsReport) -> f64, m: f64| {
            (reports.iter().map(|r| (f(r) - m) * (f(r) - m)).sum::<f64>() / n).sqrt()
        };
        Self {
            accuracy: var(&|r| r.accuracy, mean.accuracy),
            precision: var(&|r| r.precision, mean.precision),
            recall: var(&|r| r.recall, mean.recall),
            f1: var(&|r| r.f1, mean.f1),
        }
    }
}
