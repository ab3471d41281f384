//! Classic-control and toy pixel-control environments plus a synchronous
//! advantage actor-critic trainer with worker-parallel rollouts, reward
//! transforms, optional importance clamping, and trailing-window ticket
//! evaluation.

pub mod a2c;
pub mod acrobot;
pub mod cartpole;
pub mod catcher;
pub mod config;
pub mod env;
pub mod error;
pub mod rollout;

pub use a2c::{train_agent, EpisodeRow, TrainOutcome, UpdateDiagnostics};
pub use acrobot::Acrobot;
pub use cartpole::CartPole;
pub use catcher::Catcher;
pub use config::{EpochUnit, EvalProtocol, RewardTransform, TrainerConfig};
pub use env::{EnvKind, Environment, StepOutcome};
pub use error::{RlError, RlResult};
pub use rollout::{collect_rollouts, compute_returns_advantages, RolloutBatch};
