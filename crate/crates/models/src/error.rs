use std::fmt;

use lt_tensor::TensorError;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    /// Invalid family or size in a model configuration.
    Config(String),
    /// A call violated an interface contract (wrong shapes, bad tokens, ...).
    Contract(String),
    Tensor(TensorError),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::Config(msg) => write!(f, "configuration error: {msg}"),
            ModelError::Contract(msg) => write!(f, "contract violation: {msg}"),
            ModelError::Tensor(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ModelError {}

impl From<TensorError> for ModelError {
    fn from(e: TensorError) -> Self {
        ModelError::Tensor(e)
    }
}

pub type ModelResult<T> = Result<T, ModelError>;
