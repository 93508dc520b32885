//! Dense layers, tied-weight autoencoders, greedy stacking, and the
//! softmax classification head, all trained by plain mini-batch gradient
//! descent from a seeded random source.

mod autoencoder;
mod head;
mod layer;
mod linalg;
mod stacked;
mod train;

pub use autoencoder::{ReconstructionGrads, TiedAutoencoder};
pub use head::{argmax_rows, predict_proba, SoftmaxHead};
pub use layer::{softmax, softmax_rows, Activation, DenseLayerParams};
pub use stacked::StackedAutoencoder;
pub use train::{
    finetune_supervised, supervised_grads, supervised_loss, LayerGrads, SupervisedGrads,
    TrainConfig,
};
