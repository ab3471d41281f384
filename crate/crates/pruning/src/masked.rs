//! The masked-training contract.
//!
//! Enforcement happens at the optimizer boundary: before every update the
//! parameters at pruned positions must already be exactly zero, gradients at
//! pruned positions are zeroed, and after the update both weights and
//! optimizer moments at pruned positions are zeroed. A nonzero pruned weight
//! found before a step means some code wrote through the mask; that aborts
//! the run.

use lt_models::ParamRegistry;
use lt_tensor::{optimizer_step, GradientMap, OptimizerConfig, OptimizerState};

use crate::error::{PruneError, PruneResult};
use crate::mask::PruneMask;
use crate::ticket::Ticket;

/// Load a ticket's weights into the registry.
pub fn apply_ticket(registry: &mut ParamRegistry, ticket: &Ticket) -> PruneResult<()> {
    if !ticket.mask.aligned_with(registry) {
        return Err(PruneError::Contract(
            "ticket is not aligned with the registry".into(),
        ));
    }
    ticket.weights.apply_to(registry)
}

/// One optimizer step under an optional mask.
pub fn masked_optimizer_step(
    state: &mut OptimizerState,
    config: &OptimizerConfig,
    registry: &mut ParamRegistry,
    grads: &mut GradientMap,
    mask: Option<&PruneMask>,
) -> PruneResult<()> {
    if let Some(mask) = mask {
        if !mask.aligned_with(registry) {
            return Err(PruneError::Contract(
                "mask is not aligned with the registry".into(),
            ));
        }
        for entry in mask.entries() {
            let tensor = registry.tensor(&entry.name)?;
            for (i, (&w, &keep)) in tensor.data().iter().zip(&entry.keep).enumerate() {
                if !keep && w != 0.0 {
                    return Err(PruneError::InvariantViolation(format!(
                        "pruned weight `{}`[{i}] is {w:e} before the update",
                        entry.name
                    )));
                }
            }
            grads.mask(&entry.name, &entry.keep);
        }
    }

    optimizer_step(state, config, &mut registry.params_mut(), grads)?;

    if let Some(mask) = mask {
        for entry in mask.entries() {
            // Zero both the weight and the moment accumulators at pruned
            // positions so momentum can never resurrect a pruned weight.
            if let Some(slot) = state.slot_mut(&entry.name) {
                for moment in slot.tensors_mut() {
                    for (v, &keep) in moment.data_mut().iter_mut().zip(&entry.keep) {
                        if !keep {
                            *v = 0.0;
                        }
                    }
                }
            }
        }
        for entry in mask.entries() {
            let name = entry.name.clone();
            let mut tensor = registry.tensor(&name)?.clone();
            let mut dirty = false;
            for (v, &keep) in tensor.data_mut().iter_mut().zip(&entry.keep) {
                if !keep && *v != 0.0 {
                    *v = 0.0;
                    dirty = true;
                }
            }
            if dirty {
                registry.set_tensor(&name, tensor)?;
            }
        }
    }
    Ok(())
}
