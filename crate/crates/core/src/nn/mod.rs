//! Dense networks for the learned right-hand side, the bounded
//! derivative-order parameterization, the loss, and Adam.

mod adam;
mod alpha;
pub mod io;
mod loss;
mod mlp;

use thiserror::Error;

pub use adam::AdamState;
pub use alpha::{inverse_sigmoid, AlphaParam};
pub use loss::mse_loss;
pub use mlp::{DenseLayer, HiddenActivation, Mlp, MlpConfig, OutputActivation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("invalid network configuration: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite gradient at parameter {index}")]
    NonFiniteGradient { index: usize },
    #[error("{0}")]
    Autodiff(#[from] crate::autodiff::AutodiffError),
}
