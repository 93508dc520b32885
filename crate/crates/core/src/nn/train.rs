//! Supervised fine-tuning of the stacked encoder plus softmax head.

use serde::{Deserialize, Serialize};

use crate::data::FeatureMatrix;
use crate::error::{Error, Result};
use crate::nn::head::SoftmaxHead;
use crate::nn::layer::softmax_rows;
use crate::nn::linalg;
use crate::nn::stacked::StackedAutoencoder;
use crate::random::RandomSource;

/// Hyperparameters for one gradient-descent run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Zero epochs is a valid no-op: parameters are returned unchanged.
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Multiplier on the ±sqrt(6/fan_in) init bound.
    pub init_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            epochs: 50,
            batch_size: 64,
            seed: 0,
            init_scale: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig {
                detail: format!("learning rate must be positive, got {}", self.learning_rate),
            });
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig {
                detail: "batch size must be at least 1".into(),
            });
        }
        if !(self.init_scale.is_finite() && self.init_scale > 0.0) {
            return Err(Error::InvalidConfig {
                detail: format!("init scale must be positive, got {}", self.init_scale),
            });
        }
        Ok(())
    }
}

/// Gradients for one dense layer.
#[derive(Debug, Clone)]
pub struct LayerGrads {
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Gradients of the cross-entropy loss for the whole encoder stack and
/// the head, plus the loss value.
#[derive(Debug, Clone)]
pub struct SupervisedGrads {
    /// One entry per encoder layer, in stack order.
    pub layers: Vec<LayerGrads>,
    pub head: LayerGrads,
    pub loss: f64,
}

/// Mean cross-entropy of softmax(head(encode(x))) against class codes,
/// computed with the log-sum-exp trick.
pub fn supervised_loss(
    stack: &StackedAutoencoder,
    head: &SoftmaxHead,
    x: &FeatureMatrix,
    labels: &[u32],
) -> Result<f64> {
    check_labels(head, x, labels)?;
    let hidden = stack.encode(x)?;
    let logits = head.logits(&hidden)?;
    let mut total = 0.0;
    for (r, &y) in labels.iter().enumerate() {
        let row = logits.row(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_sum: f64 = row.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
        total -= row[y as usize] - max - log_sum;
    }
    Ok(total / x.rows().max(1) as f64)
}

fn check_labels(head: &SoftmaxHead, x: &FeatureMatrix, labels: &[u32]) -> Result<()> {
    if labels.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            context: "label count".into(),
            expected: x.rows(),
            found: labels.len(),
        });
    }
    if let Some(&bad) = labels.iter().find(|&&l| l as usize >= head.n_classes()) {
        return Err(Error::InvalidConfig {
            detail: format!(
                "label code {bad} out of range for {} classes",
                head.n_classes()
            ),
        });
    }
    Ok(())
}

/// One backward pass of the cross-entropy loss through the head and
/// every encoder layer.
pub fn supervised_grads(
    stack: &StackedAutoencoder,
    head: &SoftmaxHead,
    x: &FeatureMatrix,
    labels: &[u32],
) -> Result<SupervisedGrads> {
    check_labels(head, x, labels)?;
    let act = stack.activation();
    let n = x.rows().max(1) as f64;

    // Forward, keeping pre- and post-activations per layer.
    let mut pre = Vec::with_capacity(stack.layers().len());
    let mut post = Vec::with_capacity(stack.layers().len() + 1);
    post.push(x.clone());
    for layer in stack.layers() {
        let z = layer.encoder().preactivation(post.last().expect("nonempty"));
        post.push(act.apply_matrix(&z));
        pre.push(z);
    }
    let hidden = post.last().expect("nonempty");
    let logits = head.logits(hidden)?;
    let proba = softmax_rows(&logits);

    let mut loss = 0.0;
    for (r, &y) in labels.iter().enumerate() {
        let row = logits.row(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_sum: f64 = row.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
        loss -= row[y as usize] - max - log_sum;
    }
    loss /= n;

    // dLogits = (P - onehot) / n
    let mut dlogits = proba;
    for (r, &y) in labels.iter().enumerate() {
        let row = dlogits.row_mut(r);
        row[y as usize] -= 1.0;
        for v in row.iter_mut() {
            *v /= n;
        }
    }

    let head_grads = LayerGrads {
        weight: linalg::matmul_atb(hidden, &dlogits),
        bias: linalg::column_sums(&dlogits),
    };
    // dH_L = dLogits · Wheadᵀ
    let mut dh = linalg::matmul_abt(
        &dlogits,
        head.layer().weight(),
        head.in_dim(),
        head.n_classes(),
    );

    let mut layer_grads: Vec<LayerGrads> = Vec::with_capacity(stack.layers().len());
    for (k, layer) in stack.layers().iter().enumerate().rev() {
        let zk = &pre[k];
        let dz_values: Vec<f64> = dh
            .values()
            .iter()
            .zip(zk.values())
            .map(|(&g, &z)| g * act.derivative(z))
            .collect();
        let dz = FeatureMatrix::new(zk.rows(), zk.cols(), dz_values)?;
        layer_grads.push(LayerGrads {
            weight: linalg::matmul_atb(&post[k], &dz),
            bias: linalg::column_sums(&dz),
        });
        if k > 0 {
            let enc = layer.encoder();
            dh = linalg::matmul_abt(&dz, enc.weight(), enc.in_dim(), enc.out_dim());
        }
    }
    layer_grads.reverse();

    Ok(SupervisedGrads {
        layers: layer_grads,
        head: head_grads,
        loss,
    })
}

/// Jointly fine-tune the encoder stack and the softmax head by
/// backpropagating cross-entropy through softmax(head(encode(x))).
///
/// Mini-batch order is shuffled deterministically from the config seed.
/// With `head_only` set, encoder layers are frozen and only the head is
/// updated. Decoder biases are never touched here; decoders play no part
/// in the classification path. Returns the loss history (initial loss
/// first, then one entry per epoch).
pub fn finetune_supervised(
    stack: &mut StackedAutoencoder,
    head: &mut SoftmaxHead,
    x: &FeatureMatrix,
    labels: &[u32],
    cfg: &TrainConfig,
    head_only: bool,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    check_labels(head, x, labels)?;
    let mut rng = RandomSource::new(cfg.seed);
    let mut history = Vec::with_capacity(cfg.epochs + 1);
    history.push(supervised_loss(stack, head, x, labels)?);

    let mut order: Vec<usize> = (0..x.rows()).collect();
    for epoch in 1..=cfg.epochs {
        rng.shuffle(&mut order);
        for batch in order.chunks(cfg.batch_size) {
            let xb = x.select_rows(batch);
            let yb: Vec<u32> = batch.iter().map(|&i| labels[i]).collect();
            let grads = supervised_grads(stack, head, &xb, &yb)?;
            if !grads.loss.is_finite() {
                return Err(Error::Training {
                    stage: "fine-tuning".into(),
                    epoch,
                    detail: "non-finite batch loss".into(),
                });
            }
            linalg::axpy_neg(head.layer_mut().weight_mut(), cfg.learning_rate, &grads.head.weight);
            linalg::axpy_neg(head.layer_mut().bias_mut(), cfg.learning_rate, &grads.head.bias);
            if !head_only {
                for (layer, g) in stack.layers_mut().iter_mut().zip(&grads.layers) {
                    let enc = layer.encoder_mut();
                    linalg::axpy_neg(enc.weight_mut(), cfg.learning_rate, &g.weight);
                    linalg::axpy_neg(enc.bias_mut(), cfg.learning_rate, &g.bias);
                }
            }
        }
        let loss = supervised_loss(stack, head, x, labels)?;
        if !loss.is_finite() {
            return Err(Error::Training {
                stage: "fine-tuning".into(),
                epoch,
                detail: "non-finite epoch loss".into(),
            });
        }
        history.push(loss);
    }
    Ok(history)
}
