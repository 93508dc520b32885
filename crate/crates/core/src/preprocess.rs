//! Min-max feature normalization, fitted on training data only.

use serde::{Deserialize, Serialize};

use crate::data::FeatureMatrix;
use crate::error::{Error, Result};

/// Which linear map to apply per column.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizerMode {
    /// u = (x - min) / (max - min), clamped to [0, 1].
    #[default]
    Standard,
    /// u = (x - max) / (max - min), clamped to [-1, 0]: the same spread
    /// anchored at the column maximum instead of the minimum.
    PaperLiteral,
}

impl std::str::FromStr for NormalizerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(NormalizerMode::Standard),
            "paper-literal" => Ok(NormalizerMode::PaperLiteral),
            other => Err(Error::InvalidConfig {
                detail: format!(
                    "unknown normalizer mode `{other}` (expected standard|paper-literal)"
                ),
            }),
        }
    }
}

/// Per-column min/max learned from a training matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    mins: Vec<f64>,
    maxs: Vec<f64>,
    mode: NormalizerMode,
}

impl Normalizer {
    /// Learn column extrema from the training matrix only.
    pub fn fit(train: &FeatureMatrix, mode: NormalizerMode) -> Result<Self> {
        let (mins, maxs) = train.column_extrema().map_err(|_| Error::EmptyInput {
            context: "cannot fit a normalizer on an empty matrix".into(),
        })?;
        Ok(Self { mins, maxs, mode })
    }

    pub fn mode(&self) -> NormalizerMode {
        self.mode
    }

    pub fn mins(&self) -> &[f64] {
        &self.mins
    }

    pub fn maxs(&self) -> &[f64] {
        &self.maxs
    }

    pub fn n_columns(&self) -> usize {
        self.mins.len()
    }

    /// Apply the fitted map. Values outside the fitted range are clamped;
    /// constant columns map to 0 in both modes.
    pub fn apply(&self, data: &FeatureMatrix) -> Result<FeatureMatrix> {
        if data.cols() != self.mins.len() {
            return Err(Error::DimensionMismatch {
                context: "normalizer columns".into(),
                expected: self.mins.len(),
                found: data.cols(),
            });
        }
        let mut out = data.clone();
        for r in 0..out.rows() {
            let row = out.row_mut(r);
            for (c, v) in row.iter_mut().enumerate() {
                let (lo, hi) = (self.mins[c], self.maxs[c]);
                let span = hi - lo;
                *v = if span == 0.0 {
                    0.0
                } else {
                    match self.mode {
                        NormalizerMode::Standard => ((*v - lo) / span).clamp(0.0, 1.0),
                        NormalizerMode::PaperLiteral => ((*v - hi) / span).clamp(-1.0, 0.0),
                    }
                };
            }
        }
        Ok(out)
    }
}
