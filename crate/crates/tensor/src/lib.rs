//! Dense f64 tensors with reverse-mode automatic differentiation.
//!
//! Everything is CPU-only and deterministic: the same seed and the same
//! operation sequence produce bit-identical results. Non-finite values are
//! treated as errors at every operation boundary rather than being allowed
//! to propagate.

pub mod error;
pub mod fdcheck;
pub mod gradsuite;
pub mod graph;
mod kernels;
pub mod optim;
pub mod rng;
pub mod tensor;

pub use error::{Result, TensorError};
pub use graph::{GradientMap, Graph, Var};
pub use optim::{optimizer_step, OptimizerConfig, OptimizerState};
pub use rng::{derive_seed, Rng};
pub use tensor::Tensor;
