//! Stacked autoencoder: greedy layer-wise pretraining and the encode
//! path used by the classifier stages.

use serde::{Deserialize, Serialize};

use crate::data::FeatureMatrix;
use crate::error::{Error, Result};
use crate::nn::autoencoder::TiedAutoencoder;
use crate::nn::layer::Activation;
use crate::nn::train::TrainConfig;
use crate::random::RandomSource;

/// A stack of tied-weight autoencoders. Layer k encodes the hidden
/// representation of layer k-1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedAutoencoder {
    layers: Vec<TiedAutoencoder>,
    activation: Activation,
    decoder_activation: Activation,
    input_dim: usize,
    hidden_dims: Vec<usize>,
}

impl StackedAutoencoder {
    /// Initialize a stack with the given hidden widths.
    pub fn init(
        input_dim: usize,
        hidden_dims: &[usize],
        activation: Activation,
        decoder_activation: Activation,
        init_scale: f64,
        rng: &mut RandomSource,
    ) -> Result<Self> {
        if hidden_dims.is_empty() {
            return Err(Error::InvalidConfig {
                detail: "stacked autoencoder needs at least one hidden layer".into(),
            });
        }
        if input_dim == 0 || hidden_dims.contains(&0) {
            return Err(Error::InvalidConfig {
                detail: "layer widths must be nonzero".into(),
            });
        }
        let mut layers = Vec::with_capacity(hidden_dims.len());
        let mut prev = input_dim;
        for &dim in hidden_dims {
            layers.push(TiedAutoencoder::init(prev, dim, init_scale, rng));
            prev = dim;
        }
        Ok(Self {
            layers,
            activation,
            decoder_activation,
            input_dim,
            hidden_dims: hidden_dims.to_vec(),
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dims(&self) -> &[usize] {
        &self.hidden_dims
    }

    pub fn output_dim(&self) -> usize {
        *self.hidden_dims.last().expect("at least one layer")
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn decoder_activation(&self) -> Activation {
        self.decoder_activation
    }

    pub fn layers(&self) -> &[TiedAutoencoder] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [TiedAutoencoder] {
        &mut self.layers
    }

    /// Apply every encoder in order; the result is the compressed
    /// representation fed to the classifier head or the forest.
    pub fn encode(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        if x.cols() != self.input_dim {
            return Err(Error::DimensionMismatch {
                context: "stacked encoder input".into(),
                expected: self.input_dim,
                found: x.cols(),
            });
        }
        let mut h = x.clone();
        for layer in &self.layers {
            h = layer.encode(&h, self.activation)?;
        }
        Ok(h)
    }

    /// Encode through all layers then decode back in reverse order.
    pub fn reconstruct(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        let mut h = x.clone();
        for layer in &self.layers {
            h = layer.encode(&h, self.activation)?;
        }
        for (i, layer) in self.layers.iter().enumerate().rev() {
            // Inner decoders feed hidden layers, so they use the encoder
            // nonlinearity; only the outermost decode uses the decoder
            // activation.
            let act = if i == 0 {
                self.decoder_activation
            } else {
                self.activation
            };
            h = layer.decode(&h, act)?;
        }
        Ok(h)
    }

    /// Per-row mean squared reconstruction error.
    pub fn reconstruction_errors(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        let y = self.reconstruct(x)?;
        let cols = x.cols().max(1) as f64;
        Ok((0..x.rows())
            .map(|r| {
                x.row(r)
                    .iter()
                    .zip(y.row(r))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    / cols
            })
            .collect())
    }

    /// Greedy layer-wise pretraining: layer 0 learns to reconstruct the
    /// input, then its encoding becomes the training input of layer 1,
    /// and so on. Returns one loss history per layer. Each layer's
    /// shuffling seed is derived from the config seed and the layer
    /// index.
    pub fn pretrain(&mut self, x: &FeatureMatrix, cfg: &TrainConfig) -> Result<Vec<Vec<f64>>> {
        let root = RandomSource::new(cfg.seed);
        let mut histories = Vec::with_capacity(self.layers.len());
        let mut inputs = x.clone();
        for (k, layer) in self.layers.iter_mut().enumerate() {
            let layer_cfg = TrainConfig {
                seed: root.child(k as u64).seed(),
                ..cfg.clone()
            };
            // Hidden targets are nonnegative under ReLU, so inner layers
            // can decode with the encoder nonlinearity; layer 0 decodes
            // with the configured decoder activation.
            let dec_act = if k == 0 {
                self.decoder_activation
            } else {
                self.activation
            };
            let history = layer.pretrain(&inputs, &layer_cfg, self.activation, dec_act)?;
            histories.push(history);
            inputs = layer.encode(&inputs, self.activation)?;
        }
        Ok(histories)
    }
}
