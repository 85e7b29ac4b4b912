//! The split network: a dense model from flattened CSI to flattened
//! beamforming matrices whose bottleneck separates the STA-side head from the
//! AP-side tail.

mod arch;
mod bottleneck;
pub mod data;
pub mod format;
mod loss;
mod model;
mod train;

pub use arch::{Activation, ArchSpec};
pub use bottleneck::{
    airtime_bits as bottleneck_airtime_bits, dequantize_bottleneck, quantize_bottleneck, BottleneckCodes,
};
pub use data::{examples, flatten, unflatten};
pub use format::{load_model, save_model, ModelPart, Role};
pub use loss::{batch_loss, grad, loss, loss_term, Example};
pub use model::{Dense, Gradient, SplitModel};
pub use train::{
    train, write_history_csv, EpochRecord, Optimizer, TrainConfig, TrainOutcome, ADAM_BETA1, ADAM_BETA2, ADAM_EPS,
};
