use crate::acrobot::Acrobot;
use crate::cartpole::CartPole;
use crate::catcher::Catcher;
use crate::error::RlResult;

pub struct StepOutcome {
    pub obs: Vec<f64>,
    pub reward: f64,
    pub terminal: bool,
}

/// A discrete-action environment with an internal episode RNG stream.
///
/// `reset` starts a fresh episode; `step` after a terminal transition
/// without a reset is a contract violation.
pub trait Environment: Send {
    fn obs_shape(&self) -> Vec<usize>;
    fn action_count(&self) -> usize;
    fn max_episode_steps(&self) -> usize;
    fn reset(&mut self) -> Vec<f64>;
    fn step(&mut self, action: usize) -> RlResult<StepOutcome>;
    /// Replace the episode RNG stream.
    fn reseed(&mut self, seed: u64);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvKind {
    CartPole,
    Acrobot,
    Catcher,
}

impl EnvKind {
    pub fn build(&self, seed: u64) -> Box<dyn Environment> {
        match self {
            EnvKind::CartPole => Box::new(CartPole::new(seed)),
            EnvKind::Acrobot => Box::new(Acrobot::new(seed)),
            EnvKind::Catcher => Box::new(Catcher::new(seed)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnvKind::CartPole => "cartpole",
            EnvKind::Acrobot => "acrobot",
            EnvKind::Catcher => "catcher",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "cartpole" => Some(EnvKind::CartPole),
            "acrobot" => Some(EnvKind::Acrobot),
            "catcher" => Some(EnvKind::Catcher),
            _ => None,
        }
    }
}
