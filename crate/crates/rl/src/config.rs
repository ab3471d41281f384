use lt_tensor::OptimizerConfig;

use crate::error::{RlError, RlResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardTransform {
    /// Immediate rewards divided by 100 (classic-control setting).
    DivideBy100,
    /// Immediate rewards clipped to [-1, +1] (pixel-control setting).
    ClipUnit,
    None,
}

impl RewardTransform {
    pub fn apply(&self, r: f64) -> f64 {
        match self {
            RewardTransform::DivideBy100 => r / 100.0,
            RewardTransform::ClipUnit => r.clamp(-1.0, 1.0),
            RewardTransform::None => r,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RewardTransform::DivideBy100 => "divide-by-100",
            RewardTransform::ClipUnit => "clip-to-unit",
            RewardTransform::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "divide-by-100" | "divide100" => Some(RewardTransform::DivideBy100),
            "clip-to-unit" | "clip" => Some(RewardTransform::ClipUnit),
            "none" => Some(RewardTransform::None),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainerConfig {
    /// Parallel rollout workers (game threads).
    pub workers: usize,
    /// Steps collected per worker between updates.
    pub n_steps: usize,
    pub gamma: f64,
    pub entropy_weight: f64,
    pub value_weight: f64,
    pub reward_transform: RewardTransform,
    /// Clip advantages to [-1, +1] before the policy-gradient term.
    pub advantage_clip: bool,
    /// Upper clamp for the importance ratio; None disables the correction.
    pub importance_clamp: Option<f64>,
    /// Collect with parameters one gradient step behind the update, so the
    /// importance ratio is exercised even in synchronous training.
    pub update_lag: bool,
    pub optimizer: OptimizerConfig,
}

impl TrainerConfig {
    /// Classic-control defaults: 32 workers, 4 steps (128-step batches),
    /// rewards divided by 100, RMSprop 1e-4. The entropy weight is lower
    /// than the pixel setting; 0.01 leaves enough residual exploration
    /// noise to hold trailing-window CartPole reward below 195.
    pub fn classic_control() -> Self {
        TrainerConfig {
            workers: 32,
            n_steps: 4,
            gamma: 0.99,
            entropy_weight: 0.003,
            value_weight: 0.5,
            reward_transform: RewardTransform::DivideBy100,
            advantage_clip: false,
            importance_clamp: None,
            update_lag: false,
            optimizer: OptimizerConfig::rmsprop(1e-4),
        }
    }

    /// Pixel-control defaults: reward/advantage clipping, entropy 0.01,
    /// importance ratio clamped at 1.5, Adam 1e-3 (eps 1e-3).
    pub fn pixel_control() -> Self {
        TrainerConfig {
            workers: 32,
            n_steps: 6,
            gamma: 0.99,
            entropy_weight: 0.01,
            value_weight: 0.5,
            reward_transform: RewardTransform::ClipUnit,
            advantage_clip: true,
            importance_clamp: Some(1.5),
            update_lag: true,
            optimizer: OptimizerConfig::adam(1e-3),
        }
    }

    pub fn validate(&self) -> RlResult<()> {
        if self.workers == 0 || self.n_steps == 0 {
            return Err(RlError::Contract("workers and n_steps must be positive".into()));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(RlError::Contract(format!("gamma {} outside (0, 1]", self.gamma)));
        }
        if self.entropy_weight < 0.0 {
            return Err(RlError::Contract("entropy weight must be >= 0".into()));
        }
        if let Some(c) = self.importance_clamp {
            if c <= 1.0 {
                return Err(RlError::Contract(format!("importance clamp {c} must be > 1")));
            }
        }
        self.optimizer.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpochUnit {
    Episodes,
    Batches,
}

impl EpochUnit {
    pub fn name(&self) -> &'static str {
        match self {
            EpochUnit::Episodes => "episodes",
            EpochUnit::Batches => "batches",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "episodes" | "games" => Some(EpochUnit::Episodes),
            "batches" => Some(EpochUnit::Batches),
            _ => None,
        }
    }
}

/// Ticket-evaluation protocol: train for `epochs` epochs of `per_epoch`
/// episodes or batches, then report the mean raw return over the last
/// `window` completed episodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalProtocol {
    pub epochs: usize,
    pub per_epoch: usize,
    pub unit: EpochUnit,
    pub window: usize,
}

impl EvalProtocol {
    /// CartPole row: N=20, M=160 games, L=100.
    pub fn cartpole() -> Self {
        EvalProtocol {
            epochs: 20,
            per_epoch: 160,
            unit: EpochUnit::Episodes,
            window: 100,
        }
    }

    /// Acrobot row: N=20, M=320 games, L=100.
    pub fn acrobot() -> Self {
        EvalProtocol {
            epochs: 20,
            per_epoch: 320,
            unit: EpochUnit::Episodes,
            window: 100,
        }
    }

    /// Toy pixel-control row: batch-based epochs with an episode-based
    /// trailing window.
    pub fn catcher() -> Self {
        EvalProtocol {
            epochs: 10,
            per_epoch: 100,
            unit: EpochUnit::Batches,
            window: 64,
        }
    }

    pub fn validate(&self) -> RlResult<()> {
        if self.epochs == 0 || self.per_epoch == 0 || self.window == 0 {
            return Err(RlError::Contract(
                "evaluation protocol fields must be positive".into(),
            ));
        }
        Ok(())
    }
}
