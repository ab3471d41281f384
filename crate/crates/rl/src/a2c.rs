//! Synchronous advantage actor-critic with the masked-training contract.

use lt_models::{Model, ParamRegistry};
use lt_pruning::{masked_optimizer_step, ModelSnapshot, PruneMask, RewindPolicy, RewindUnit};
use lt_tensor::{derive_seed, Graph, OptimizerState, Rng};

use crate::config::{EpochUnit, EvalProtocol, TrainerConfig};
use crate::env::EnvKind;
use crate::error::{RlError, RlResult};
use crate::rollout::{collect_rollouts, compute_returns_advantages, CompletedEpisode, RolloutBatch, WorkerState};

#[derive(Debug, Clone, Copy)]
pub struct UpdateDiagnostics {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
}

/// One completed episode in the reward trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRow {
    pub index: usize,
    pub raw_return: f64,
    pub epoch: usize,
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub episodes: Vec<EpisodeRow>,
    /// Mean raw return over the last `window` episodes.
    pub ticket_reward: f64,
    pub rewind_snapshot: Option<ModelSnapshot>,
    pub trained: ModelSnapshot,
    pub updates: usize,
    pub last_diagnostics: Option<UpdateDiagnostics>,
}

/// One gradient update from a collected batch. The policy-gradient term is
/// -factor * log pi(a|s) * advantage with the advantage (and factor) treated
/// as constants; the factor is min(pi_new/pi_behavior, ceiling) when
/// importance clamping is enabled and exactly 1 otherwise.
#[allow(clippy::too_many_arguments)]
pub fn a2c_update(
    batch: &RolloutBatch,
    model: &Model,
    registry: &mut ParamRegistry,
    cfg: &TrainerConfig,
    state: &mut OptimizerState,
    mask: Option<&PruneMask>,
) -> RlResult<UpdateDiagnostics> {
    let g = Graph::new();
    let (logits, values) = model.forward_actor_critic(&g, registry, &batch.obs)?;
    let logp = g.log_softmax(logits)?;
    let probs = g.softmax(logits)?;
    let chosen = g.select_index(logp, &batch.actions)?;

    // Advantages from detached value estimates.
    let value_est = g.value(values).data().to_vec();
    let (targets, advantages) =
        compute_returns_advantages(batch, &value_est, cfg.gamma, cfg.reward_transform, cfg.advantage_clip)?;

    // Constant policy-gradient weights: advantage times importance factor.
    // The current-policy probability comes through the same softmax path
    // the collector used, so a synchronous ratio is exactly 1.
    let prob_values = g.value(probs);
    let actions_per = g.shape_of(logits)[1];
    let pg_weights: Vec<f64> = advantages
        .iter()
        .enumerate()
        .map(|(i, adv)| {
            let factor = match cfg.importance_clamp {
                Some(ceiling) => {
                    let p_new = prob_values.data()[i * actions_per + batch.actions[i]];
                    (p_new / batch.behavior_probs[i]).min(ceiling)
                }
                None => 1.0,
            };
            factor * adv
        })
        .collect();

    let weighted = g.mul(chosen, g.constant(lt_tensor::Tensor::from_vec(pg_weights))).map_err(RlError::from)?;
    let policy_loss = g.scale(g.mean_all(weighted)?, -1.0)?;

    let err = g.sub(values, g.constant(lt_tensor::Tensor::from_vec(targets)))?;
    let value_loss = g.mean_all(g.mul(err, err)?)?;

    let plogp = g.mul(probs, logp)?;
    let neg_entropy = g.mean_all(g.sum_last(plogp)?)?;

    let loss = g.add(policy_loss, g.scale(value_loss, cfg.value_weight)?)?;
    let loss = g.add(loss, g.scale(neg_entropy, cfg.entropy_weight)?)?;

    let diag = UpdateDiagnostics {
        policy_loss: g.value(policy_loss).item(),
        value_loss: g.value(value_loss).item(),
        entropy: -g.value(neg_entropy).item(),
    };
    if !g.value(loss).item().is_finite() {
        return Err(RlError::NumericFailure(format!(
            "non-finite A2C loss ({diag:?})"
        )));
    }

    let mut grads = g.backward(loss)?;
    masked_optimizer_step(state, &cfg.optimizer, registry, &mut grads, mask)?;
    Ok(diag)
}

/// Train an agent in place under the evaluation protocol, returning the
/// reward trace, the trailing-window ticket reward, and snapshots.
///
/// All randomness derives from `seed`: worker environments and action
/// samplers get independent streams, so results do not depend on scheduling.
#[allow(clippy::too_many_arguments)]
pub fn train_agent(
    model: &Model,
    registry: &mut ParamRegistry,
    env_kind: EnvKind,
    cfg: &TrainerConfig,
    protocol: &EvalProtocol,
    mask: Option<&PruneMask>,
    rewind: Option<&RewindPolicy>,
    seed: u64,
) -> RlResult<TrainOutcome> {
    cfg.validate()?;
    protocol.validate()?;

    let mut workers: Vec<WorkerState> = (0..cfg.workers)
        .map(|w| {
            let mut env = env_kind.build(derive_seed(seed, &["env", &w.to_string()]));
            let obs = env.reset();
            WorkerState {
                env,
                rng: Rng::from_seed(derive_seed(seed, &["actor", &w.to_string()])),
                obs,
                episode_return: 0.0,
                episode_steps: 0,
            }
        })
        .collect();

    let mut state = OptimizerState::new();
    let mut completed: Vec<CompletedEpisode> = Vec::new();
    let mut episode_epochs: Vec<usize> = Vec::new();
    let mut updates = 0usize;
    let mut last_diagnostics;

    let mut rewind_snapshot = None;
    let capture_now = |updates: usize, episodes: usize, policy: &RewindPolicy| -> bool {
        match policy.unit {
            RewindUnit::Updates => updates >= policy.point,
            RewindUnit::Epochs => match protocol.unit {
                EpochUnit::Episodes => episodes >= policy.point * protocol.per_epoch,
                EpochUnit::Batches => updates >= policy.point * protocol.per_epoch,
            },
        }
    };
    if let Some(policy) = rewind {
        if policy.is_initialization() {
            rewind_snapshot = Some(ModelSnapshot::from_registry(registry));
        }
    }

    // Behavior parameters for collection; lags one update when enabled.
    let mut behavior = cfg.update_lag.then(|| registry.clone());

    let total_budget = protocol.epochs * protocol.per_epoch;
    loop {
        let before = completed.len();
        let collect_registry = behavior.as_ref().unwrap_or(registry);
        let batch = collect_rollouts(model, collect_registry, &mut workers, cfg.n_steps, &mut completed)?;
        // Epoch tag for episodes completed in this segment.
        for _ in before..completed.len() {
            let epoch = match protocol.unit {
                EpochUnit::Episodes => episode_epochs.len() / protocol.per_epoch,
                EpochUnit::Batches => updates / protocol.per_epoch,
            };
            episode_epochs.push(epoch);
        }

        if let Some(b) = behavior.as_mut() {
            *b = registry.clone();
        }
        last_diagnostics = Some(a2c_update(&batch, model, registry, cfg, &mut state, mask)?);
        updates += 1;

        if let Some(policy) = rewind {
            if rewind_snapshot.is_none() && capture_now(updates, completed.len(), policy) {
                rewind_snapshot = Some(ModelSnapshot::from_registry(registry));
            }
        }

        let done = match protocol.unit {
            EpochUnit::Episodes => completed.len() >= total_budget,
            EpochUnit::Batches => updates >= total_budget,
        };
        if done {
            break;
        }
    }

    if completed.len() < protocol.window {
        return Err(RlError::Protocol(format!(
            "only {} episodes completed, but the trailing window needs {}",
            completed.len(),
            protocol.window
        )));
    }
    let tail = &completed[completed.len() - protocol.window..];
    let ticket_reward = tail.iter().map(|e| e.raw_return).sum::<f64>() / protocol.window as f64;

    let episodes = completed
        .iter()
        .zip(&episode_epochs)
        .enumerate()
        .map(|(index, (e, &epoch))| EpisodeRow {
            index,
            raw_return: e.raw_return,
            epoch,
        })
        .collect();

    Ok(TrainOutcome {
        episodes,
        ticket_reward,
        rewind_snapshot,
        trained: ModelSnapshot::from_registry(registry),
        updates,
        last_diagnostics,
    })
}
