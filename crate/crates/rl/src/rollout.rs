use lt_models::{Model, ParamRegistry};
use lt_tensor::{Graph, Rng, Tensor};

use crate::config::RewardTransform;
use crate::env::Environment;
use crate::error::{RlError, RlResult};

/// One segment of experience: `workers x n_steps` transitions in fixed
/// worker-major order (index = worker * n_steps + step).
pub struct RolloutBatch {
    pub workers: usize,
    pub n_steps: usize,
    pub obs_shape: Vec<usize>,
    /// [workers * n_steps, ..obs_shape]
    pub obs: Tensor,
    pub actions: Vec<usize>,
    /// Raw, untransformed immediate rewards.
    pub rewards: Vec<f64>,
    pub terminals: Vec<bool>,
    /// Behavior-policy probability of the taken action, recorded at
    /// collection time.
    pub behavior_probs: Vec<f64>,
    /// Value estimate of the state after the last transition, zero where
    /// that transition was terminal. One entry per worker.
    pub bootstrap_values: Vec<f64>,
}

impl RolloutBatch {
    pub fn len(&self) -> usize {
        self.workers * self.n_steps
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A raw-reward episode ledger entry produced during collection.
#[derive(Debug, Clone, Copy)]
pub struct CompletedEpisode {
    pub raw_return: f64,
    pub steps: usize,
}

/// Per-worker collection state that persists across segments.
pub struct WorkerState {
    pub env: Box<dyn Environment>,
    pub rng: Rng,
    pub obs: Vec<f64>,
    pub episode_return: f64,
    pub episode_steps: usize,
}

/// Collect one segment: every worker contributes exactly `n_steps`
/// transitions; actions are sampled from the policy given by
/// (model, registry); completed episodes are appended to `completed` in
/// (step, worker) order.
pub fn collect_rollouts(
    model: &Model,
    registry: &ParamRegistry,
    workers: &mut [WorkerState],
    n_steps: usize,
    completed: &mut Vec<CompletedEpisode>,
) -> RlResult<RolloutBatch> {
    let t = workers.len();
    if t == 0 || n_steps == 0 {
        return Err(RlError::Contract("empty rollout request".into()));
    }
    let obs_shape = workers[0].env.obs_shape();
    let obs_len: usize = obs_shape.iter().product();
    let actions_per = workers[0].env.action_count();

    let mut obs_data = vec![0.0; t * n_steps * obs_len];
    let mut actions = vec![0usize; t * n_steps];
    let mut rewards = vec![0.0; t * n_steps];
    let mut terminals = vec![false; t * n_steps];
    let mut behavior_probs = vec![0.0; t * n_steps];

    for step in 0..n_steps {
        // One batched policy forward over all workers.
        let mut step_obs = Vec::with_capacity(t * obs_len);
        for w in workers.iter() {
            step_obs.extend_from_slice(&w.obs);
        }
        let mut batch_shape = vec![t];
        batch_shape.extend_from_slice(&obs_shape);
        let obs_tensor = Tensor::new(batch_shape, step_obs)?;
        let g = Graph::new();
        let (logits, _) = model.forward_actor_critic(&g, registry, &obs_tensor)?;
        let probs = g.softmax(logits)?;
        let probs = g.value(probs);

        for (wi, worker) in workers.iter_mut().enumerate() {
            let row = &probs.data()[wi * actions_per..(wi + 1) * actions_per];
            let action = worker.rng.categorical(row);
            let outcome = worker.env.step(action)?;

            let idx = wi * n_steps + step;
            obs_data[(idx * obs_len)..(idx + 1) * obs_len].copy_from_slice(&worker.obs);
            actions[idx] = action;
            rewards[idx] = outcome.reward;
            terminals[idx] = outcome.terminal;
            behavior_probs[idx] = row[action];

            worker.episode_return += outcome.reward;
            worker.episode_steps += 1;
            if outcome.terminal {
                completed.push(CompletedEpisode {
                    raw_return: worker.episode_return,
                    steps: worker.episode_steps,
                });
                worker.episode_return = 0.0;
                worker.episode_steps = 0;
                worker.obs = worker.env.reset();
            } else {
                worker.obs = outcome.obs;
            }
        }
    }

    // Bootstrap values for non-terminal segment tails.
    let mut tail_obs = Vec::with_capacity(t * obs_len);
    for w in workers.iter() {
        tail_obs.extend_from_slice(&w.obs);
    }
    let mut batch_shape = vec![t];
    batch_shape.extend_from_slice(&obs_shape);
    let g = Graph::new();
    let (_, values) = model.forward_actor_critic(&g, registry, &Tensor::new(batch_shape, tail_obs)?)?;
    let values = g.value(values);
    let bootstrap_values: Vec<f64> = (0..t)
        .map(|wi| {
            if terminals[wi * n_steps + n_steps - 1] {
                0.0
            } else {
                values.data()[wi]
            }
        })
        .collect();

    let mut full_shape = vec![t * n_steps];
    full_shape.extend_from_slice(&obs_shape);
    Ok(RolloutBatch {
        workers: t,
        n_steps,
        obs_shape,
        obs: Tensor::new(full_shape, obs_data)?,
        actions,
        rewards,
        terminals,
        behavior_probs,
        bootstrap_values,
    })
}

/// n-step discounted returns with bootstrapping, and advantages against the
/// provided value estimates. Transform order: reward transform, then return
/// accumulation, then advantage, then optional advantage clip.
pub fn compute_returns_advantages(
    batch: &RolloutBatch,
    values: &[f64],
    gamma: f64,
    transform: RewardTransform,
    clip_advantages: bool,
) -> RlResult<(Vec<f64>, Vec<f64>)> {
    if values.len() != batch.len() {
        return Err(RlError::Contract(format!(
            "{} values for {} transitions",
            values.len(),
            batch.len()
        )));
    }
    let mut targets = vec![0.0; batch.len()];
    let mut advantages = vec![0.0; batch.len()];
    for w in 0..batch.workers {
        let mut g = batch.bootstrap_values[w];
        for step in (0..batch.n_steps).rev() {
            let idx = w * batch.n_steps + step;
            if batch.terminals[idx] {
                g = 0.0;
            }
            g = transform.apply(batch.rewards[idx]) + gamma * g;
            targets[idx] = g;
            let mut adv = g - values[idx];
            if clip_advantages {
                adv = adv.clamp(-1.0, 1.0);
            }
            advantages[idx] = adv;
        }
    }
    Ok((targets, advantages))
}
