use std::fmt;

use lt_models::ModelError;
use lt_pruning::PruneError;
use lt_tensor::TensorError;

#[derive(Debug)]
pub enum NlpError {
    Contract(String),
    NumericFailure(String),
    Io(std::io::Error),
    Model(ModelError),
    Prune(PruneError),
    Tensor(TensorError),
}

impl fmt::Display for NlpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NlpError::Contract(msg) => write!(f, "contract violation: {msg}"),
            NlpError::NumericFailure(msg) => write!(f, "numeric failure: {msg}"),
            NlpError::Io(e) => write!(f, "io error: {e}"),
            NlpError::Model(e) => write!(f, "{e}"),
            NlpError::Prune(e) => write!(f, "{e}"),
            NlpError::Tensor(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for NlpError {}

impl From<std::io::Error> for NlpError {
    fn from(e: std::io::Error) -> Self {
        NlpError::Io(e)
    }
}

impl From<ModelError> for NlpError {
    fn from(e: ModelError) -> Self {
        NlpError::Model(e)
    }
}

impl From<PruneError> for NlpError {
    fn from(e: PruneError) -> Self {
        NlpError::Prune(e)
    }
}

impl From<TensorError> for NlpError {
    fn from(e: TensorError) -> Self {
        NlpError::Tensor(e)
    }
}

pub type NlpResult<T> = Result<T, NlpError>;
