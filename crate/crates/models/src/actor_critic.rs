use lt_tensor::{Graph, Tensor, Var};

use crate::config::ModelConfig;
use crate::error::{ModelError, ModelResult};
use crate::registry::{InitSpec, ParamRegistry, PruneGroup};

fn fan_in(n: usize) -> InitSpec {
    InitSpec::UniformFanIn {
        bound: (1.0 / n as f64).sqrt(),
    }
}

/// Fully-connected trunk with policy and value heads.
#[derive(Debug, Clone)]
pub struct MlpActorCritic {
    pub config: ModelConfig,
    obs_dim: usize,
    hidden: Vec<usize>,
}

impl MlpActorCritic {
    pub(crate) fn build(config: ModelConfig, reg: &mut ParamRegistry) -> ModelResult<Self> {
        let ModelConfig::MlpActorCritic {
            obs_dim,
            actions,
            ref hidden,
        } = config
        else {
            return Err(ModelError::Config("wrong family for MlpActorCritic".into()));
        };
        let mut prev = obs_dim;
        for (i, &h) in hidden.iter().enumerate() {
            reg.add(&format!("trunk.{i}.w"), &[h, prev], fan_in(prev), PruneGroup::Core)?;
            reg.add(
                &format!("trunk.{i}.b"),
                &[h],
                InitSpec::Constant(0.0),
                PruneGroup::Core,
            )?;
            prev = h;
        }
        reg.add("policy.w", &[actions, prev], fan_in(prev), PruneGroup::Core)?;
        reg.add("policy.b", &[actions], InitSpec::Constant(0.0), PruneGroup::Core)?;
        reg.add("value.w", &[1, prev], fan_in(prev), PruneGroup::Core)?;
        reg.add("value.b", &[1], InitSpec::Constant(0.0), PruneGroup::Core)?;
        Ok(MlpActorCritic {
            obs_dim,
            hidden: hidden.clone(),
            config,
        })
    }

    /// obs: [batch, obs_dim] -> (logits [batch, actions], values [batch]).
    pub fn forward(
        &self,
        g: &Graph,
        reg: &ParamRegistry,
        obs: &Tensor,
    ) -> ModelResult<(Var, Var)> {
        if obs.rank() != 2 || obs.shape()[1] != self.obs_dim {
            return Err(ModelError::Contract(format!(
                "observation shape {:?} does not match obs_dim {}",
                obs.shape(),
                self.obs_dim
            )));
        }
        let batch = obs.shape()[0];
        let p = reg.bind(g);
        let mut x = g.constant(obs.clone());
        for i in 0..self.hidden.len() {
            let h = g.linear(x, p.var(&format!("trunk.{i}.w")), Some(p.var(&format!("trunk.{i}.b"))))?;
            x = g.relu(h)?;
        }
        let logits = g.linear(x, p.var("policy.w"), Some(p.var("policy.b")))?;
        let value = g.linear(x, p.var("value.w"), Some(p.var("value.b")))?;
        let value = g.reshape(value, &[batch])?;
        Ok((logits, value))
    }
}

/// Conv trunk (two 3x3 conv + 2x2 max-pool blocks) with the same heads.
#[derive(Debug, Clone)]
pub struct ConvActorCritic {
    pub config: ModelConfig,
    in_channels: usize,
    obs_size: usize,
    conv_channels: usize,
    fc: Vec<usize>,
}

impl ConvActorCritic {
    pub(crate) fn build(config: ModelConfig, reg: &mut ParamRegistry) -> ModelResult<Self> {
        let ModelConfig::ConvActorCritic {
            in_channels,
            obs_size,
            actions,
            conv_channels,
            ref fc,
        } = config
        else {
            return Err(ModelError::Config("wrong family for ConvActorCritic".into()));
        };
        let c = conv_channels;
        reg.add(
            "conv.0.w",
            &[c, in_channels, 3, 3],
            fan_in(in_channels * 9),
            PruneGroup::Core,
        )?;
        reg.add("conv.0.b", &[c], InitSpec::Constant(0.0), PruneGroup::Core)?;
        reg.add("conv.1.w", &[c, c, 3, 3], fan_in(c * 9), PruneGroup::Core)?;
        reg.add("conv.1.b", &[c], InitSpec::Constant(0.0), PruneGroup::Core)?;
        let mut prev = c * (obs_size / 4) * (obs_size / 4);
        for (i, &h) in fc.iter().enumerate() {
            reg.add(&format!("fc.{i}.w"), &[h, prev], fan_in(prev), PruneGroup::Core)?;
            reg.add(
                &format!("fc.{i}.b"),
                &[h],
                InitSpec::Constant(0.0),
                PruneGroup::Core,
            )?;
            prev = h;
        }
        reg.add("policy.w", &[actions, prev], fan_in(prev), PruneGroup::Core)?;
        reg.add("policy.b", &[actions], InitSpec::Constant(0.0), PruneGroup::Core)?;
        reg.add("value.w", &[1, prev], fan_in(prev), PruneGroup::Core)?;
        reg.add("value.b", &[1], InitSpec::Constant(0.0), PruneGroup::Core)?;
        Ok(ConvActorCritic {
            in_channels,
            obs_size,
            conv_channels,
            fc: fc.clone(),
            config,
        })
    }

    /// obs: [batch, channels, size, size] -> (logits, values).
    pub fn forward(
        &self,
        g: &Graph,
        reg: &ParamRegistry,
        obs: &Tensor,
    ) -> ModelResult<(Var, Var)> {
        let want = [self.in_channels, self.obs_size, self.obs_size];
        if obs.rank() != 4 || obs.shape()[1..] != want {
            return Err(ModelError::Contract(format!(
                "observation shape {:?} does not match (*, {want:?})",
                obs.shape()
            )));
        }
        let batch = obs.shape()[0];
        let p = reg.bind(g);
        let mut x = g.constant(obs.clone());
        for i in 0..2 {
            let c = g.conv2d(
                x,
                p.var(&format!("conv.{i}.w")),
                Some(p.var(&format!("conv.{i}.b"))),
                1,
                1,
            )?;
            let c = g.relu(c)?;
            x = g.max_pool2d(c, 2)?;
        }
        let flat = self.conv_channels * (self.obs_size / 4) * (self.obs_size / 4);
        let mut x = g.reshape(x, &[batch, flat])?;
        for i in 0..self.fc.len() {
            let h = g.linear(x, p.var(&format!("fc.{i}.w")), Some(p.var(&format!("fc.{i}.b"))))?;
            x = g.relu(h)?;
        }
        let logits = g.linear(x, p.var("policy.w"), Some(p.var("policy.b")))?;
        let value = g.linear(x, p.var("value.w"), Some(p.var("value.b")))?;
        let value = g.reshape(value, &[batch])?;
        Ok((logits, value))
    }
}
