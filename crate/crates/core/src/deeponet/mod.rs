//! Branch/trunk operator networks.

mod checkpoint;
pub mod gradcheck;
mod lipschitz;
mod model;
mod train;

pub use checkpoint::Checkpoint;
pub use lipschitz::{estimate_j, estimate_j_masked, j_upper_bound, InputBox, JEstimate};
pub use model::{DeepOnet, LossGrads};
pub use train::{TrainConfig, Trainer};
