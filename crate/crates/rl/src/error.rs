use std::fmt;

use lt_models::ModelError;
use lt_pruning::PruneError;
use lt_tensor::TensorError;

#[derive(Debug)]
pub enum RlError {
    /// Out-of-range action, step after terminal, bad shapes.
    Contract(String),
    /// The evaluation protocol could not be satisfied.
    Protocol(String),
    /// Training produced a non-finite loss; the run is aborted.
    NumericFailure(String),
    Model(ModelError),
    Prune(PruneError),
    Tensor(TensorError),
}

impl fmt::Display for RlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RlError::Contract(msg) => write!(f, "contract violation: {msg}"),
            RlError::Protocol(msg) => write!(f, "protocol error: {msg}"),
            RlError::NumericFailure(msg) => write!(f, "numeric failure: {msg}"),
            RlError::Model(e) => write!(f, "{e}"),
            RlError::Prune(e) => write!(f, "{e}"),
            RlError::Tensor(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RlError {}

impl From<ModelError> for RlError {
    fn from(e: ModelError) -> Self {
        RlError::Model(e)
    }
}

impl From<PruneError> for RlError {
    fn from(e: PruneError) -> Self {
        RlError::Prune(e)
    }
}

impl From<TensorError> for RlError {
    fn from(e: TensorError) -> Self {
        RlError::Tensor(e)
    }
}

pub type RlResult<T> = Result<T, RlError>;
