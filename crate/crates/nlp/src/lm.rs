use lt_models::{LstmLm, ParamRegistry};
use lt_pruning::{masked_optimizer_step, ModelSnapshot, PruneMask, RewindPolicy, RewindUnit};
use lt_tensor::{derive_seed, Graph, OptimizerConfig, OptimizerState, Rng};

use crate::batch::{batchify, StreamMatrix};
use crate::corpus::Corpus;
use crate::error::{NlpError, NlpResult};

#[derive(Debug, Clone, Copy)]
pub struct BpttConfig {
    pub seq_len: usize,
    pub batch_size: usize,
    pub epochs: usize,
    /// Optional global-norm gradient clip; none applied by default.
    pub grad_clip: Option<f64>,
}

impl BpttConfig {
    /// Paper-style defaults: windows of 50 over 30 streams, 10 epochs.
    pub fn standard() -> Self {
        BpttConfig {
            seq_len: 50,
            batch_size: 30,
            epochs: 10,
            grad_clip: None,
        }
    }

    pub fn validate(&self) -> NlpResult<()> {
        if let Some(c) = self.grad_clip {
            if c <= 0.0 {
                return Err(NlpError::Contract(format!("grad clip {c} must be positive")));
            }
        }
        if self.seq_len == 0 || self.batch_size == 0 || self.epochs == 0 {
            return Err(NlpError::Contract(
                "BPTT sequence length, batch size and epochs must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One epoch over the stream matrix with truncated backpropagation: the
/// hidden state carries across windows as a constant and resets only here,
/// at the epoch boundary. Returns the mean per-token training loss.
#[allow(clippy::too_many_arguments)]
pub fn train_lm_epoch(
    lm: &LstmLm,
    registry: &mut ParamRegistry,
    streams: &StreamMatrix,
    bptt: &BpttConfig,
    optimizer: &OptimizerConfig,
    state: &mut OptimizerState,
    mask: Option<&PruneMask>,
    dropout_rng: &mut Rng,
) -> NlpResult<f64> {
    bptt.validate()?;
    let mut carried = None;
    let mut total_loss = 0.0;
    let mut total_tokens = 0usize;
    for (inputs, targets, steps) in streams.windows(bptt.seq_len) {
        let g = Graph::new();
        let (logp, new_state) = lm.forward(
            &g,
            registry,
            &inputs,
            streams.batch,
            steps,
            carried.as_ref(),
            Some(dropout_rng),
        )?;
        let loss = g.nll_mean(logp, &targets)?;
        let loss_value = g.value(loss).item();
        if !loss_value.is_finite() {
            return Err(NlpError::NumericFailure("non-finite LM training loss".into()));
        }
        let mut grads = g.backward(loss)?;
        if let Some(max_norm) = bptt.grad_clip {
            grads.scale_to_max_norm(max_norm);
        }
        masked_optimizer_step(state, optimizer, registry, &mut grads, mask)?;
        carried = Some(new_state);
        total_loss += loss_value * (streams.batch * steps) as f64;
        total_tokens += streams.batch * steps;
    }
    Ok(total_loss / total_tokens.max(1) as f64)
}

#[derive(Debug, Clone, Copy)]
pub struct PerplexityReport {
    pub log_perplexity: f64,
    pub perplexity: f64,
    pub tokens: usize,
}

/// Log perplexity (mean per-token negative log-likelihood) over a split,
/// evaluated with dropout off and state carried across windows.
pub fn eval_perplexity(
    lm: &LstmLm,
    registry: &ParamRegistry,
    split: &[usize],
    batch_size: usize,
    seq_len: usize,
) -> NlpResult<PerplexityReport> {
    let streams = batchify(split, batch_size)?;
    let mut carried = None;
    let mut total_nll = 0.0;
    let mut tokens = 0usize;
    for (inputs, targets, steps) in streams.windows(seq_len) {
        let g = Graph::new();
        let (logp, new_state) = lm.forward(
            &g,
            registry,
            &inputs,
            streams.batch,
            steps,
            carried.as_ref(),
            None,
        )?;
        let loss = g.nll_mean(logp, &targets)?;
        total_nll += g.value(loss).item() * (streams.batch * steps) as f64;
        tokens += streams.batch * steps;
        carried = Some(new_state);
    }
    if tokens == 0 {
        return Err(NlpError::Contract("split too short to evaluate".into()));
    }
    let log_perplexity = total_nll / tokens as f64;
    Ok(PerplexityReport {
        log_perplexity,
        perplexity: log_perplexity.exp(),
        tokens,
    })
}

#[derive(Debug)]
pub struct LmTrainOutcome {
    pub epoch_losses: Vec<f64>,
    pub rewind_snapshot: Option<ModelSnapshot>,
    pub trained: ModelSnapshot,
    pub test: PerplexityReport,
}

/// Full training run: `epochs` passes over the train split followed by test
/// perplexity, with an optional rewind snapshot captured mid-training.
///
/// With an epoch-unit rewind point the snapshot is taken after that many
/// full epochs; with an update-unit point, after that many optimizer steps.
#[allow(clippy::too_many_arguments)]
pub fn train_lm(
    lm: &LstmLm,
    registry: &mut ParamRegistry,
    corpus: &Corpus,
    bptt: &BpttConfig,
    optimizer: &OptimizerConfig,
    mask: Option<&PruneMask>,
    rewind: Option<&RewindPolicy>,
    seed: u64,
) -> NlpResult<LmTrainOutcome> {
    bptt.validate()?;
    let streams = batchify(&corpus.train, bptt.batch_size)?;
    let mut state = OptimizerState::new();
    let mut rewind_snapshot = None;
    if let Some(policy) = rewind {
        if policy.is_initialization() {
            rewind_snapshot = Some(ModelSnapshot::from_registry(registry));
        }
    }

    let mut epoch_losses = Vec::with_capacity(bptt.epochs);
    for epoch in 0..bptt.epochs {
        let mut dropout_rng =
            Rng::from_seed(derive_seed(seed, &["dropout", &epoch.to_string()]));
        match rewind {
            // Update-unit capture has to watch individual steps.
            Some(policy) if rewind_snapshot.is_none() && policy.unit == RewindUnit::Updates => {
                let mut carried = None;
                let mut total_loss = 0.0;
                let mut total_tokens = 0usize;
                for (inputs, targets, steps) in streams.windows(bptt.seq_len) {
                    let g = Graph::new();
                    let (logp, new_state) = lm.forward(
                        &g,
                        registry,
                        &inputs,
                        streams.batch,
                        steps,
                        carried.as_ref(),
                        Some(&mut dropout_rng),
                    )?;
                    let loss = g.nll_mean(logp, &targets)?;
                    let loss_value = g.value(loss).item();
                    if !loss_value.is_finite() {
                        return Err(NlpError::NumericFailure(
                            "non-finite LM training loss".into(),
                        ));
                    }
                    let mut grads = g.backward(loss)?;
                    if let Some(max_norm) = bptt.grad_clip {
                        grads.scale_to_max_norm(max_norm);
                    }
                    masked_optimizer_step(&mut state, optimizer, registry, &mut grads, mask)?;
                    carried = Some(new_state);
                    total_loss += loss_value * (streams.batch * steps) as f64;
                    total_tokens += streams.batch * steps;
                    if rewind_snapshot.is_none() && state.step_count() >= policy.point as u64 {
                        rewind_snapshot = Some(ModelSnapshot::from_registry(registry));
                    }
                }
                epoch_losses.push(total_loss / total_tokens.max(1) as f64);
            }
            _ => {
                let loss = train_lm_epoch(
                    lm,
                    registry,
                    &streams,
                    bptt,
                    optimizer,
                    &mut state,
                    mask,
                    &mut dropout_rng,
                )?;
                epoch_losses.push(loss);
            }
        }
        if let Some(policy) = rewind {
            if rewind_snapshot.is_none()
                && policy.unit == RewindUnit::Epochs
                && epoch + 1 >= policy.point
            {
                rewind_snapshot = Some(ModelSnapshot::from_registry(registry));
            }
        }
    }

    let test = eval_perplexity(lm, registry, &corpus.test, bptt.batch_size, bptt.seq_len)?;
    Ok(LmTrainOutcome {
        epoch_losses,
        rewind_snapshot,
        trained: ModelSnapshot::from_registry(registry),
        test,
    })
}
