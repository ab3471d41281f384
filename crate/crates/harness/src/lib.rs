//! Orchestration: experiment configs, iterative-pruning runs across seeds,
//! ablations, artifact persistence with resume support, curve reports, and
//! artifact verification. The `ticketlab` binary is a thin shell over this
//! library.

pub mod config;
pub mod error;
pub mod experiment;
pub mod inspect;
pub mod record;
pub mod report;
pub mod task;
pub mod verify;

pub use config::{ExperimentConfig, PruneMode, TaskSelector, Variant};
pub use error::{HarnessError, HarnessResult};
pub use experiment::{run_experiment, RunOptions};
pub use record::{RecordRow, RunRecord, SeedCell};
pub use report::emit_report;
