use std::fmt;

use lt_models::ModelError;
use lt_tensor::TensorError;

#[derive(Debug)]
pub enum PruneError {
    /// Caller violated an operation precondition.
    Contract(String),
    /// An internal guarantee failed; the run must be aborted.
    InvariantViolation(String),
    /// Malformed snapshot/mask file.
    Format(String),
    Io(std::io::Error),
    Model(ModelError),
    Tensor(TensorError),
}

impl fmt::Display for PruneError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PruneError::Contract(msg) => write!(f, "contract violation: {msg}"),
            PruneError::InvariantViolation(msg) => write!(f, "invariant violation: {msg}"),
            PruneError::Format(msg) => write!(f, "format error: {msg}"),
            PruneError::Io(e) => write!(f, "io error: {e}"),
            PruneError::Model(e) => write!(f, "{e}"),
            PruneError::Tensor(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for PruneError {}

impl From<std::io::Error> for PruneError {
    fn from(e: std::io::Error) -> Self {
        PruneError::Io(e)
    }
}

impl From<ModelError> for PruneError {
    fn from(e: ModelError) -> Self {
        PruneError::Model(e)
    }
}

impl From<TensorError> for PruneError {
    fn from(e: TensorError) -> Self {
        PruneError::Tensor(e)
    }
}

pub type PruneResult<T> = Result<T, PruneError>;
