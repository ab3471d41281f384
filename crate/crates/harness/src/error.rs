use std::fmt;

#[derive(Debug)]
pub enum HarnessError {
    /// Malformed config or CLI usage; exits with status 2.
    Usage(String),
    /// Persisted artifacts are inconsistent or cannot be resumed.
    Integrity(String),
    /// A run failed (numeric failure, env contract, io, ...).
    Run(String),
    Io(std::io::Error),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Usage(msg) => write!(f, "usage error: {msg}"),
            HarnessError::Integrity(msg) => write!(f, "integrity error: {msg}"),
            HarnessError::Run(msg) => write!(f, "run error: {msg}"),
            HarnessError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e)
    }
}

macro_rules! from_run_error {
    ($($ty:ty),*) => {
        $(impl From<$ty> for HarnessError {
            fn from(e: $ty) -> Self {
                HarnessError::Run(e.to_string())
            }
        })*
    };
}

from_run_error!(
    lt_tensor::TensorError,
    lt_models::ModelError,
    lt_pruning::PruneError,
    lt_rl::RlError,
    lt_nlp::NlpError
);

pub type HarnessResult<T> = Result<T, HarnessError>;
