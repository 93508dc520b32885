//! Single autoencoder with tied weights.
//!
//! The decoder weight is the transpose of the encoder weight and shares
//! its storage: encode is g(x·W + b1), decode is g(d·Wᵀ + b2). Only the
//! encoder matrix, the encoder bias, and the decoder bias are trainable
//! state.

use serde::{Deserialize, Serialize};

use crate::data::FeatureMatrix;
use crate::error::{Error, Result};
use crate::nn::layer::{Activation, DenseLayerParams};
use crate::nn::linalg;
use crate::nn::train::TrainConfig;
use crate::random::RandomSource;

/// Tied-weight autoencoder parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiedAutoencoder {
    encoder: DenseLayerParams,
    decoder_bias: Vec<f64>,
}

/// Gradients of the reconstruction loss with respect to every trainable
/// parameter, plus the loss itself.
#[derive(Debug, Clone)]
pub struct ReconstructionGrads {
    pub weight: Vec<f64>,
    pub encoder_bias: Vec<f64>,
    pub decoder_bias: Vec<f64>,
    pub loss: f64,
}

impl TiedAutoencoder {
    pub fn init(in_dim: usize, hidden_dim: usize, scale: f64, rng: &mut RandomSource) -> Self {
        Self {
            encoder: DenseLayerParams::init(in_dim, hidden_dim, scale, rng),
            decoder_bias: vec![0.0; in_dim],
        }
    }

    pub fn from_parts(encoder: DenseLayerParams, decoder_bias: Vec<f64>) -> Self {
        assert_eq!(decoder_bias.len(), encoder.in_dim());
        Self {
            encoder,
            decoder_bias,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.encoder.in_dim()
    }

    pub fn hidden_dim(&self) -> usize {
        self.encoder.out_dim()
    }

    pub fn encoder(&self) -> &DenseLayerParams {
        &self.encoder
    }

    pub fn encoder_mut(&mut self) -> &mut DenseLayerParams {
        &mut self.encoder
    }

    pub fn decoder_bias(&self) -> &[f64] {
        &self.decoder_bias
    }

    pub fn decoder_bias_mut(&mut self) -> &mut [f64] {
        &mut self.decoder_bias
    }

    fn check_input(&self, x: &FeatureMatrix) -> Result<()> {
        if x.cols() != self.in_dim() {
            return Err(Error::DimensionMismatch {
                context: "autoencoder input".into(),
                expected: self.in_dim(),
                found: x.cols(),
            });
        }
        Ok(())
    }

    /// Hidden representation g(x·W + b1).
    pub fn encode(&self, x: &FeatureMatrix, activation: Activation) -> Result<FeatureMatrix> {
        self.check_input(x)?;
        Ok(activation.apply_matrix(&self.encoder.preactivation(x)))
    }

    /// Decode a hidden representation: g(d·Wᵀ + b2).
    pub fn decode(&self, hidden: &FeatureMatrix, activation: Activation) -> Result<FeatureMatrix> {
        if hidden.cols() != self.hidden_dim() {
            return Err(Error::DimensionMismatch {
                context: "autoencoder hidden input".into(),
                expected: self.hidden_dim(),
                found: hidden.cols(),
            });
        }
        let mut z = linalg::matmul_abt(
            hidden,
            self.encoder.weight(),
            self.in_dim(),
            self.hidden_dim(),
        );
        linalg::add_bias(&mut z, &self.decoder_bias);
        Ok(activation.apply_matrix(&z))
    }

    /// Full round trip: encode then decode. Output shape equals input
    /// shape.
    pub fn reconstruct(
        &self,
        x: &FeatureMatrix,
        enc_act: Activation,
        dec_act: Activation,
    ) -> Result<FeatureMatrix> {
        let hidden = self.encode(x, enc_act)?;
        self.decode(&hidden, dec_act)
    }

    /// Mean squared reconstruction error over all cells.
    pub fn reconstruction_loss(
        &self,
        x: &FeatureMatrix,
        enc_act: Activation,
        dec_act: Activation,
    ) -> Result<f64> {
        let y = self.reconstruct(x, enc_act, dec_act)?;
        let n = (x.rows() * x.cols()).max(1) as f64;
        Ok(x.values()
            .iter()
            .zip(y.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / n)
    }

    /// Analytic gradients of the mean squared reconstruction error on a
    /// batch. Exposed so training and gradient verification share one
    /// backward pass.
    pub fn reconstruction_grads(
        &self,
        x: &FeatureMatrix,
        enc_act: Activation,
        dec_act: Activation,
    ) -> Result<ReconstructionGrads> {
        self.check_input(x)?;
        let (in_dim, hidden_dim) = (self.in_dim(), self.hidden_dim());
        let w = self.encoder.weight();

        let z1 = self.encoder.preactivation(x);
        let d = enc_act.apply_matrix(&z1);
        let mut z2 = linalg::matmul_abt(&d, w, in_dim, hidden_dim);
        linalg::add_bias(&mut z2, &self.decoder_bias);
        let y = dec_act.apply_matrix(&z2);

        let scale = 2.0 / (x.rows() * x.cols()).max(1) as f64;
        let loss = x
            .values()
            .iter()
            .zip(y.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / (x.rows() * x.cols()).max(1) as f64;

        // dZ2 = 2(Y - X)/N ⊙ dec'(Z2)
        let dz2_values: Vec<f64> = y
            .values()
            .iter()
            .zip(x.values())
            .zip(z2.values())
            .map(|((&yv, &xv), &zv)| scale * (yv - xv) * dec_act.derivative(zv))
            .collect();
        let dz2 = FeatureMatrix::new(x.rows(), in_dim, dz2_values)?;

        let decoder_bias_grad = linalg::column_sums(&dz2);
        // Decoder contribution to the shared weight: dZ2ᵀ · D (in×hidden).
        let w_dec = linalg::matmul_atb(&dz2, &d);
        // dD = dZ2 · W (rows × hidden).
        let dd = linalg::matmul(&dz2, w, in_dim, hidden_dim);
        // dZ1 = dD ⊙ enc'(Z1)
        let dz1_values: Vec<f64> = dd
            .values()
            .iter()
            .zip(z1.values())
            .map(|(&g, &z)| g * enc_act.derivative(z))
            .collect();
        let dz1 = FeatureMatrix::new(x.rows(), hidden_dim, dz1_values)?;

        let encoder_bias_grad = linalg::column_sums(&dz1);
        // Encoder contribution: Xᵀ · dZ1 (in×hidden).
        let mut weight_grad = linalg::matmul_atb(x, &dz1);
        for (g, d) in weight_grad.iter_mut().zip(&w_dec) {
            *g += d;
        }

        Ok(ReconstructionGrads {
            weight: weight_grad,
            encoder_bias: encoder_bias_grad,
            decoder_bias: decoder_bias_grad,
            loss,
        })
    }

    /// Mini-batch gradient descent on the reconstruction error.
    ///
    /// Returns the loss history: entry 0 is the loss before any update,
    /// entry k the full-dataset loss after epoch k. Errors if the loss
    /// stops being finite.
    pub fn pretrain(
        &mut self,
        inputs: &FeatureMatrix,
        cfg: &TrainConfig,
        enc_act: Activation,
        dec_act: Activation,
    ) -> Result<Vec<f64>> {
        cfg.validate()?;
        if inputs.rows() == 0 {
            return Err(Error::EmptyInput {
                context: "pretraining inputs".into(),
            });
        }
        let mut rng = RandomSource::new(cfg.seed);
        let mut history = Vec::with_capacity(cfg.epochs + 1);
        history.push(self.reconstruction_loss(inputs, enc_act, dec_act)?);

        let mut order: Vec<usize> = (0..inputs.rows()).collect();
        for epoch in 1..=cfg.epochs {
            rng.shuffle(&mut order);
            for batch in order.chunks(cfg.batch_size) {
                let xb = inputs.select_rows(batch);
                let grads = self.reconstruction_grads(&xb, enc_act, dec_act)?;
                if !grads.loss.is_finite() {
                    return Err(Error::Training {
                        stage: "pretraining".into(),
                        epoch,
                        detail: "non-finite batch loss".into(),
                    });
                }
                linalg::axpy_neg(self.encoder.weight_mut(), cfg.learning_rate, &grads.weight);
                linalg::axpy_neg(
                    self.encoder.bias_mut(),
                    cfg.learning_rate,
                    &grads.encoder_bias,
                );
                linalg::axpy_neg(&mut self.decoder_bias, cfg.learning_rate, &grads.decoder_bias);
            }
            let loss = self.reconstruction_loss(inputs, enc_act, dec_act)?;
            if !loss.is_finite() {
                return Err(Error::Training {
                    stage: "pretraining".into(),
                    epoch,
                    detail: "non-finite epoch loss".into(),
                });
            }
            history.push(loss);
        }
        Ok(history)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_autoencoder(dim: usize) -> TiedAutoencoder {
        let mut weight = vec![0.0; dim * dim];
        for i in 0..dim {
            weight[i * dim + i] = 1.0;
        }
        TiedAutoencoder::from_parts(
            DenseLayerParams::from_parts(dim, dim, weight, vec![0.0; dim]),
            vec![0.0; dim],
        )
    }

    fn correlated_data(rows: usize, latent: usize, dim: usize, seed: u64) -> FeatureMatrix {
        // Low-dimensional latent mapped up; reconstructable through a
        // bottleneck of the latent size.
        let mut rng = RandomSource::new(seed);
        let mix: Vec<f64> = (0..latent * dim).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let mut values = Vec::with_capacity(rows * dim);
        for _ in 0..rows {
            let z: Vec<f64> = (0..latent).map(|_| rng.normal()).collect();
            for j in 0..dim {
                let mut v = 0.0;
                for (k, &zk) in z.iter().enumerate() {
                    v += zk * mix[k * dim + j];
                }
                values.push(v + 0.01 * rng.normal());
            }
        }
        FeatureMatrix::new(rows, dim, values).unwrap()
    }

    #[test]
    fn identity_weights_reconstruct_nonnegative_data() {
        let ae = identity_autoencoder(3);
        let x = FeatureMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![0.5, 0.0, 4.0]]).unwrap();
        let y = ae.reconstruct(&x, Activation::Relu, Activation::Relu).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn zero_weight_reconstruction_is_the_decoder_bias() {
        let ae = TiedAutoencoder::from_parts(
            DenseLayerParams::from_parts(2, 3, vec![0.0; 6], vec![0.0; 3]),
            vec![0.25, -0.5],
        );
        let x = FeatureMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let y = ae.reconstruct(&x, Activation::Relu, Activation::Linear).unwrap();
        assert_eq!(y.row(0), &[0.25, -0.5]);
        assert_eq!(y.row(1), &[0.25, -0.5]);
        // encode of zero map is zero regardless of input
        let d = ae.encode(&x, Activation::Relu).unwrap();
        assert!(d.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn reconstruct_matches_naive_forward() {
        let mut rng = RandomSource::new(3);
        let ae = TiedAutoencoder::init(4, 2, 1.0, &mut rng);
        let x = FeatureMatrix::new(5, 4, (0..20).map(|i| (i as f64) / 7.0).collect()).unwrap();
        let y = ae.reconstruct(&x, Activation::Relu, Activation::Linear).unwrap();

        // Naive triple-loop evaluation of the same map.
        let w = ae.encoder().weight();
        for r in 0..5 {
            let mut hidden = [0.0f64; 2];
            for (j, h) in hidden.iter_mut().enumerate() {
                let mut acc = ae.encoder().bias()[j];
                for i in 0..4 {
                    acc += x.get(r, i) * w[i * 2 + j];
                }
                *h = acc.max(0.0);
            }
            for i in 0..4 {
                let mut acc = ae.decoder_bias()[i];
                for (j, h) in hidden.iter().enumerate() {
                    acc += h * w[i * 2 + j];
                }
                assert!((y.get(r, i) - acc).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tied_storage_changes_both_directions() {
        let mut rng = RandomSource::new(4);
        let mut ae = TiedAutoencoder::init(3, 2, 1.0, &mut rng);
        let x = FeatureMatrix::from_rows(&[vec![0.3, 0.7, 0.1]]).unwrap();
        let before = ae.reconstruct(&x, Activation::Relu, Activation::Linear).unwrap();
        ae.encoder_mut().weight_mut()[0] += 0.5;
        let after = ae.reconstruct(&x, Activation::Relu, Activation::Linear).unwrap();
        // Perturbing one encoder entry must move the reconstruction
        // through both the encode and decode paths.
        assert_ne!(before, after);
    }

    #[test]
    fn pretrain_at_optimum_is_stable() {
        let mut ae = identity_autoencoder(3);
        let x = FeatureMatrix::from_rows(&[
            vec![0.1, 0.5, 0.9],
            vec![0.4, 0.2, 0.8],
            vec![0.6, 0.3, 0.7],
        ])
        .unwrap();
        let before = ae.clone();
        let history = ae
            .pretrain(
                &x,
                &TrainConfig {
                    learning_rate: 0.01,
                    epochs: 5,
                    batch_size: 2,
                    seed: 1,
                    init_scale: 1.0,
                },
                Activation::Relu,
                Activation::Relu,
            )
            .unwrap();
        assert!(history[0] < 1e-24);
        assert!(*history.last().unwrap() < 1e-24);
        for (a, b) in ae.encoder().weight().iter().zip(before.encoder().weight()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn pretrain_halves_loss_on_correlated_data() {
        let x = correlated_data(128, 4, 8, 42);
        let mut rng = RandomSource::new(7);
        let mut ae = TiedAutoencoder::init(8, 4, 1.0, &mut rng);
        let history = ae
            .pretrain(
                &x,
                &TrainConfig {
                    learning_rate: 0.02,
                    epochs: 200,
                    batch_size: 16,
                    seed: 11,
                    init_scale: 1.0,
                },
                Activation::Relu,
                Activation::Linear,
            )
            .unwrap();
        let initial = history[0];
        let final_loss = *history.last().unwrap();
        assert!(
            final_loss < 0.5 * initial,
            "final {final_loss} vs initial {initial}"
        );
    }

    #[test]
    fn huge_learning_rate_diverges_or_increases_loss() {
        let x = correlated_data(64, 4, 8, 5);
        let mut rng = RandomSource::new(8);
        let mut ae = TiedAutoencoder::init(8, 4, 1.0, &mut rng);
        let result = ae.pretrain(
            &x,
            &TrainConfig {
                learning_rate: 10.0,
                epochs: 50,
                batch_size: 16,
                seed: 2,
                init_scale: 1.0,
            },
            Activation::Relu,
            Activation::Linear,
        );
        match result {
            Err(Error::Training { .. }) => {}
            Ok(history) => {
                assert!(
                    history.last().unwrap() > &history[0],
                    "expected divergence, got {history:?}"
                );
            }
            Err(other) => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn pretrain_descent_is_monotone_ish() {
        let x = correlated_data(96, 3, 6, 77);
        let mut rng = RandomSource::new(9);
        let mut ae = TiedAutoencoder::init(6, 3, 1.0, &mut rng);
        let history = ae
            .pretrain(
                &x,
                &TrainConfig {
                    learning_rate: 0.01,
                    epochs: 60,
                    batch_size: 16,
                    seed: 3,
                    init_scale: 1.0,
                },
                Activation::Relu,
                Activation::Linear,
            )
            .unwrap();
        for w in history.windows(2) {
            assert!(w[1] <= w[0] * 1.10, "epoch jump {} -> {}", w[0], w[1]);
        }
        assert!(history.last().unwrap() < &history[0]);
    }
}
