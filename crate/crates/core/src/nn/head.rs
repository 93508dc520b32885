//! Softmax classification head on top of the stacked encoder.

use serde::{Deserialize, Serialize};

use crate::data::FeatureMatrix;
use crate::error::{Error, Result};
use crate::nn::layer::{softmax_rows, DenseLayerParams};
use crate::nn::stacked::StackedAutoencoder;
use crate::random::RandomSource;

/// Linear layer whose outputs are turned into class probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxHead {
    layer: DenseLayerParams,
}

impl SoftmaxHead {
    pub fn init(
        in_dim: usize,
        n_classes: usize,
        scale: f64,
        rng: &mut RandomSource,
    ) -> Result<Self> {
        if n_classes < 2 {
            return Err(Error::InvalidConfig {
                detail: format!("softmax head needs at least 2 classes, got {n_classes}"),
            });
        }
        Ok(Self {
            layer: DenseLayerParams::init(in_dim, n_classes, scale, rng),
        })
    }

    pub fn from_layer(layer: DenseLayerParams) -> Self {
        Self { layer }
    }

    pub fn in_dim(&self) -> usize {
        self.layer.in_dim()
    }

    pub fn n_classes(&self) -> usize {
        self.layer.out_dim()
    }

    pub fn layer(&self) -> &DenseLayerParams {
        &self.layer
    }

    pub fn layer_mut(&mut self) -> &mut DenseLayerParams {
        &mut self.layer
    }

    /// Raw class scores for a batch of hidden representations.
    pub fn logits(&self, hidden: &FeatureMatrix) -> Result<FeatureMatrix> {
        if hidden.cols() != self.layer.in_dim() {
            return Err(Error::DimensionMismatch {
                context: "softmax head input".into(),
                expected: self.layer.in_dim(),
                found: hidden.cols(),
            });
        }
        Ok(self.layer.preactivation(hidden))
    }

    /// Class probabilities for a batch of hidden representations.
    pub fn probabilities(&self, hidden: &FeatureMatrix) -> Result<FeatureMatrix> {
        Ok(softmax_rows(&self.logits(hidden)?))
    }
}

/// Encode `x` through the stack and return per-row class probabilities.
/// Every row sums to 1.
pub fn predict_proba(
    stack: &StackedAutoencoder,
    head: &SoftmaxHead,
    x: &FeatureMatrix,
) -> Result<FeatureMatrix> {
    let hidden = stack.encode(x)?;
    head.probabilities(&hidden)
}

/// Argmax class per row of a probability (or logit) matrix; ties break
/// toward the lowest class code.
pub fn argmax_rows(proba: &FeatureMatrix) -> Vec<u32> {
    (0..proba.rows())
        .map(|r| {
            let row = proba.row(r);
            let mut best = 0usize;
            for (i, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = i;
                }
            }
            best as u32
        })
        .collect()
}
