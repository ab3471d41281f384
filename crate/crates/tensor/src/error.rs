use std::fmt;

/// Errors raised by tensor construction, graph operations and optimizers.
#[derive(Debug, Clone, PartialEq)]
pub enum TensorError {
    /// Operand shapes do not conform for the named operation.
    ShapeMismatch {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },
    /// An operation produced NaN or Inf.
    NonFinite { op: String },
    /// A gradient with NaN or Inf reached the optimizer.
    NonFiniteGradient { param: String },
    /// backward() was asked to differentiate a non-scalar.
    NotScalar { op: &'static str, shape: Vec<usize> },
    /// An argument violated an operation precondition.
    InvalidArgument { op: &'static str, msg: String },
}

impl fmt::Display for TensorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TensorError::ShapeMismatch { op, lhs, rhs } => {
                write!(f, "{op}: shape mismatch between {lhs:?} and {rhs:?}")
            }
            TensorError::NonFinite { op } => {
                write!(f, "{op}: produced a non-finite value")
            }
            TensorError::NonFiniteGradient { param } => {
                write!(f, "non-finite gradient for parameter `{param}`")
            }
            TensorError::NotScalar { op, shape } => {
                write!(f, "{op}: expected a scalar, got shape {shape:?}")
            }
            TensorError::InvalidArgument { op, msg } => write!(f, "{op}: {msg}"),
        }
    }
}

impl std::error::Error for TensorError {}

pub type Result<T> = std::result::Result<T, TensorError>;
