//! Activations, dense layer parameters, and the softmax map.

use serde::{Deserialize, Serialize};

use crate::data::FeatureMatrix;
use crate::nn::linalg;
use crate::random::RandomSource;

/// Elementwise nonlinearity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    /// max(0, z)
    #[default]
    Relu,
    /// identity
    Linear,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Linear => z,
        }
    }

    /// Derivative with respect to the pre-activation `z`.
    #[inline]
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
        }
    }

    /// Apply to a vector.
    pub fn apply_vec(self, z: &[f64]) -> Vec<f64> {
        z.iter().map(|&v| self.apply(v)).collect()
    }

    pub(crate) fn apply_matrix(self, z: &FeatureMatrix) -> FeatureMatrix {
        if self == Activation::Linear {
            return z.clone();
        }
        let values = z.values().iter().map(|&v| self.apply(v)).collect();
        FeatureMatrix::new(z.rows(), z.cols(), values).expect("same shape")
    }
}

impl std::str::FromStr for Activation {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "linear" => Ok(Activation::Linear),
            other => Err(crate::error::Error::InvalidConfig {
                detail: format!("unknown activation `{other}` (expected relu|linear)"),
            }),
        }
    }
}

/// Weight matrix and bias of one dense layer. The weight is stored
/// row-major with shape (in_dim × out_dim).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayerParams {
    in_dim: usize,
    out_dim: usize,
    weight: Vec<f64>,
    bias: Vec<f64>,
}

impl DenseLayerParams {
    /// Uniform init in ±(scale · sqrt(6 / fan_in)), biases zero.
    pub fn init(in_dim: usize, out_dim: usize, scale: f64, rng: &mut RandomSource) -> Self {
        let bound = scale * (6.0 / in_dim.max(1) as f64).sqrt();
        let weight = (0..in_dim * out_dim)
            .map(|_| rng.uniform(-bound, bound))
            .collect();
        Self {
            in_dim,
            out_dim,
            weight,
            bias: vec![0.0; out_dim],
        }
    }

    pub fn from_parts(in_dim: usize, out_dim: usize, weight: Vec<f64>, bias: Vec<f64>) -> Self {
        assert_eq!(weight.len(), in_dim * out_dim);
        assert_eq!(bias.len(), out_dim);
        Self {
            in_dim,
            out_dim,
            weight,
            bias,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    /// Mutable weight access; used by training and by gradient
    /// verification harnesses.
    pub fn weight_mut(&mut self) -> &mut [f64] {
        &mut self.weight
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    /// x·W + b without the nonlinearity.
    pub fn preactivation(&self, x: &FeatureMatrix) -> FeatureMatrix {
        debug_assert_eq!(x.cols(), self.in_dim);
        let mut z = linalg::matmul(x, &self.weight, self.in_dim, self.out_dim);
        linalg::add_bias(&mut z, &self.bias);
        z
    }
}

/// Numerically safe softmax: the max logit is subtracted before
/// exponentiation so large logits cannot overflow.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Row-wise softmax of a logit matrix.
pub fn softmax_rows(logits: &FeatureMatrix) -> FeatureMatrix {
    let mut out = logits.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let p = softmax(row);
        row.copy_from_slice(&p);
    }
    out
}
