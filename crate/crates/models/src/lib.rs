//! Network families used by the pruning experiments.
//!
//! Every model keeps its trainable tensors in a [`ParamRegistry`]: an
//! ordered, named collection with one initializer description per tensor.
//! Pruning, snapshotting and optimizer code all act on registries and never
//! on family-specific structs, so the same machinery serves MLPs, conv nets,
//! LSTMs and the small transformer alike.

pub mod actor_critic;
pub mod config;
pub mod error;
pub mod gradsuite;
pub mod lstm;
pub mod registry;
pub mod transformer;

pub use actor_critic::{ConvActorCritic, MlpActorCritic};
pub use config::ModelConfig;
pub use error::{ModelError, ModelResult};
pub use lstm::{LstmLm, LstmState};
pub use registry::{InitSpec, ParamEntry, ParamRegistry, PruneGroup};
pub use transformer::TinyTransformer;

use lt_tensor::Graph;

/// A built model: family-specific forward logic over a shared registry.
#[derive(Debug, Clone)]
pub enum Model {
    MlpActorCritic(MlpActorCritic),
    ConvActorCritic(ConvActorCritic),
    LstmLm(LstmLm),
    TinyTransformer(TinyTransformer),
}

impl Model {
    pub fn config(&self) -> ModelConfig {
        match self {
            Model::MlpActorCritic(m) => m.config.clone(),
            Model::ConvActorCritic(m) => m.config.clone(),
            Model::LstmLm(m) => m.config.clone(),
            Model::TinyTransformer(m) => m.config.clone(),
        }
    }

    /// Policy/value forward for the actor-critic families.
    pub fn forward_actor_critic(
        &self,
        g: &Graph,
        registry: &ParamRegistry,
        obs: &lt_tensor::Tensor,
    ) -> ModelResult<(lt_tensor::Var, lt_tensor::Var)> {
        match self {
            Model::MlpActorCritic(m) => m.forward(g, registry, obs),
            Model::ConvActorCritic(m) => m.forward(g, registry, obs),
            _ => Err(ModelError::Contract(
                "forward_actor_critic called on a non-actor-critic family".into(),
            )),
        }
    }
}

/// Build a registry and its forward logic from a validated config.
///
/// The same config and seed always produce bit-identical registries.
pub fn build_model(config: &ModelConfig, seed: u64) -> ModelResult<(ParamRegistry, Model)> {
    config.validate()?;
    let mut reg = ParamRegistry::new(seed);
    let model = match config {
        ModelConfig::MlpActorCritic { .. } => {
            Model::MlpActorCritic(MlpActorCritic::build(config.clone(), &mut reg)?)
        }
        ModelConfig::ConvActorCritic { .. } => {
            Model::ConvActorCritic(ConvActorCritic::build(config.clone(), &mut reg)?)
        }
        ModelConfig::LstmLm { .. } => Model::LstmLm(LstmLm::build(config.clone(), &mut reg)?),
        ModelConfig::TinyTransformer { .. } => {
            Model::TinyTransformer(TinyTransformer::build(config.clone(), &mut reg)?)
        }
    };
    Ok((reg, model))
}
