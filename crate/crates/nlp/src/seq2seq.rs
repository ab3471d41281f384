use lt_models::{ParamRegistry, TinyTransformer};
use lt_pruning::{masked_optimizer_step, ModelSnapshot, PruneMask, RewindPolicy, RewindUnit};
use lt_tensor::{Graph, OptimizerConfig, OptimizerState};

use crate::error::{NlpError, NlpResult};
use crate::synth::{TaskSplit, BOS};

/// Decoder input for teacher forcing: BOS followed by the target shifted
/// right by one.
fn shifted(tgt: &[usize]) -> Vec<usize> {
    let mut v = Vec::with_capacity(tgt.len());
    v.push(BOS);
    v.extend_from_slice(&tgt[..tgt.len() - 1]);
    v
}

#[derive(Debug)]
pub struct Seq2SeqOutcome {
    pub epoch_losses: Vec<f64>,
    pub rewind_snapshot: Option<ModelSnapshot>,
    pub trained: ModelSnapshot,
}

/// Teacher-forced cross-entropy training over length-uniform batches.
#[allow(clippy::too_many_arguments)]
pub fn train_seq2seq(
    tf: &TinyTransformer,
    registry: &mut ParamRegistry,
    train: &TaskSplit,
    batch_size: usize,
    epochs: usize,
    optimizer: &OptimizerConfig,
    mask: Option<&PruneMask>,
    rewind: Option<&RewindPolicy>,
) -> NlpResult<Seq2SeqOutcome> {
    if epochs == 0 || batch_size == 0 {
        return Err(NlpError::Contract("epochs and batch size must be positive".into()));
    }
    let mut state = OptimizerState::new();
    let mut rewind_snapshot = None;
    if let Some(policy) = rewind {
        if policy.is_initialization() {
            rewind_snapshot = Some(ModelSnapshot::from_registry(registry));
        }
    }

    let batches = train.length_batches(batch_size);
    let mut epoch_losses = Vec::with_capacity(epochs);
    for epoch in 0..epochs {
        let mut total_loss = 0.0;
        let mut total_tokens = 0usize;
        for batch in &batches {
            let b = batch.len();
            let src: Vec<usize> = batch.iter().flat_map(|(s, _)| s.iter().copied()).collect();
            let dec_in: Vec<usize> = batch.iter().flat_map(|(_, t)| shifted(t)).collect();
            let targets: Vec<usize> = batch.iter().flat_map(|(_, t)| t.iter().copied()).collect();

            let g = Graph::new();
            let logp = tf.forward(&g, registry, &src, &dec_in, b)?;
            let loss = g.nll_mean(logp, &targets)?;
            let loss_value = g.value(loss).item();
            if !loss_value.is_finite() {
                return Err(NlpError::NumericFailure(
                    "non-finite seq2seq training loss".into(),
                ));
            }
            let mut grads = g.backward(loss)?;
            masked_optimizer_step(&mut state, optimizer, registry, &mut grads, mask)?;
            total_loss += loss_value * targets.len() as f64;
            total_tokens += targets.len();

            if let Some(policy) = rewind {
                if rewind_snapshot.is_none()
                    && policy.unit == RewindUnit::Updates
                    && state.step_count() >= policy.point as u64
                {
                    rewind_snapshot = Some(ModelSnapshot::from_registry(registry));
                }
            }
        }
        epoch_losses.push(total_loss / total_tokens.max(1) as f64);
        if let Some(policy) = rewind {
            if rewind_snapshot.is_none()
                && policy.unit == RewindUnit::Epochs
                && epoch + 1 >= policy.point
            {
                rewind_snapshot = Some(ModelSnapshot::from_registry(registry));
            }
        }
    }
    Ok(Seq2SeqOutcome {
        epoch_losses,
        rewind_snapshot,
        trained: ModelSnapshot::from_registry(registry),
    })
}

/// Greedy-decoding exact-match token accuracy. The decode length is the
/// task's target length (fixed by construction); argmax ties resolve to the
/// lowest token id.
pub fn eval_token_accuracy(
    tf: &TinyTransformer,
    registry: &ParamRegistry,
    split: &TaskSplit,
) -> NlpResult<f64> {
    let mut correct = 0usize;
    let mut total = 0usize;
    for (src, tgt) in &split.pairs {
        let mut decoded: Vec<usize> = vec![BOS];
        for _ in 0..tgt.len() {
            let g = Graph::new();
            let logp = tf.forward(&g, registry, src, &decoded, 1)?;
            let lp = g.value(logp);
            let vocab = lp.shape()[2];
            let t = decoded.len() - 1;
            let row = &lp.data()[t * vocab..(t + 1) * vocab];
            let mut best = 0usize;
            for (i, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = i;
                }
            }
            decoded.push(best);
        }
        for (got, want) in decoded[1..].iter().zip(tgt) {
            if got == want {
                correct += 1;
            }
            total += 1;
        }
    }
    if total == 0 {
        return Err(NlpError::Contract("empty evaluation split".into()));
    }
    Ok(correct as f64 / total as f64)
}
