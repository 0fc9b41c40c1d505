//! Hand-written 1D-CNN: layer kernels with exact backward passes, the fixed
//! conv → pool → conv → dense → dense → output architecture, and a
//! mini-batch Adam training loop.

mod conv;
mod dense;
mod dropout;
mod loss;
mod maps;
mod network;
mod pool;
mod train;

pub use conv::{conv1d_backward, conv1d_forward, Conv1dGrads, Conv1dLayer};
pub use dense::{dense_backward, dense_forward, Activation, DenseGrads, DenseLayer};
pub use dropout::{dropout_apply, Mode};
pub use loss::mse_loss;
pub use maps::FeatureMaps;
pub use network::{build_network, Architecture, DropoutPlacement, HyperParams, Network, ParamBlock, ShapeTrace};
pub use pool::{maxpool_backward, maxpool_forward};
pub use train::{train, Adam, EpochReport, Evaluation, TraceRow, TrainConfig, TrainingSet, TrainingTrace};
