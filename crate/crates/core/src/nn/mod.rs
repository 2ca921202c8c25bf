//! Small convolutional network engine: tensors, the policy/value net with
//! analytic gradients, Adam, orthogonal initialization and the categorical
//! policy head.

mod adam;
mod dist;
mod init;
mod net;
mod tensor;

pub use adam::{adam_step, AdamState};
pub use dist::{categorical, entropy, log_softmax, CategoricalSample};
pub use init::orthogonal_init;
pub use net::{ConvSpec, Gradients, NetShape, PolicyValueNet};
pub use tensor::{Scalar, Tensor};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("backward called without a preceding forward on the same batch")]
    NoForwardCache,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parameter file: {0}")]
    Format(String),
}
