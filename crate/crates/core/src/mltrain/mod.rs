//! Linear and logistic models trained by batch gradient descent or closed
//! form, on full data or on weighted condensed samples.

mod closed;
mod data;
mod kernels;
mod train;

pub mod bench;
pub mod synth;

pub use closed::{closed_form_full, closed_form_weighted, ClosedForm};
pub use data::{Design, Samples, Standardizer};
pub use kernels::{
    gd_step_condensed, gd_step_full, gradient_logistic, gradient_mse, loss_logistic, loss_mse, loss_mse_weighted,
    sigmoid,
};
pub use train::{evaluate, train, Metrics, ModelKind, ModelParams, TrainConfig, TrainReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MlError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("weights sum to {sum}, expected {n}")]
    WeightMismatch { sum: f64, n: f64 },
    #[error("non-finite parameters at iteration {iter}")]
    NonFinite { iter: usize },
    #[error("singular normal equations: {0}")]
    SingularSystem(String),
    #[error("labels must be 0 or 1; found {0}")]
    NonBinaryLabels(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no samples")]
    Empty,
}
