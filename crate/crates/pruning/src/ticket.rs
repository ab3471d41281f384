use lt_models::ParamRegistry;
use lt_tensor::{derive_seed, Rng, Tensor};

use crate::error::{PruneError, PruneResult};
use crate::mask::PruneMask;
use crate::prune::PruneScope;
use crate::snapshot::ModelSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Winning,
    Random,
}

impl Provenance {
    pub fn name(&self) -> &'static str {
        match self {
            Provenance::Winning => "winning",
            Provenance::Random => "random",
        }
    }
}

/// A sparse sub-network: mask plus rewind weights plus lineage metadata.
/// Pruned positions in `weights` are stored as exact zeros.
#[derive(Debug, Clone)]
pub struct Ticket {
    pub mask: PruneMask,
    pub weights: ModelSnapshot,
    pub provenance: Provenance,
    pub iteration: usize,
    pub scope: PruneScope,
    pub seed: u64,
}

impl Ticket {
    /// Largest |weight| over pruned positions; zero when the contract holds.
    pub fn max_abs_pruned_weight(&self) -> f64 {
        let mut worst = 0.0f64;
        for ((_, tensor), mask_entry) in self.weights.entries().iter().zip(self.mask.entries()) {
            for (&w, &keep) in tensor.data().iter().zip(&mask_entry.keep) {
                if !keep {
                    worst = worst.max(w.abs());
                }
            }
        }
        worst
    }
}

fn masked_snapshot(snapshot: &ModelSnapshot, mask: &PruneMask) -> ModelSnapshot {
    let entries = snapshot
        .entries()
        .iter()
        .zip(mask.entries())
        .map(|((name, tensor), mask_entry)| {
            let data = tensor
                .data()
                .iter()
                .zip(&mask_entry.keep)
                .map(|(&w, &keep)| if keep { w } else { 0.0 })
                .collect();
            (
                name.clone(),
                Tensor::new(tensor.shape().to_vec(), data).expect("shape"),
            )
        })
        .collect();
    ModelSnapshot::from_entries(entries)
}

/// Winning ticket: the mask applied to the lineage's rewind-point snapshot.
pub fn make_winning_ticket(
    mask: &PruneMask,
    rewind_snapshot: &ModelSnapshot,
    iteration: usize,
    scope: PruneScope,
    lineage_seed: u64,
) -> PruneResult<Ticket> {
    let aligned = rewind_snapshot.entries().len() == mask.entries().len()
        && rewind_snapshot
            .entries()
            .iter()
            .zip(mask.entries())
            .all(|((n, t), m)| *n == m.name && t.shape() == m.shape);
    if !aligned {
        return Err(PruneError::Contract(
            "rewind snapshot does not belong to this mask's lineage".into(),
        ));
    }
    Ok(Ticket {
        mask: mask.clone(),
        weights: masked_snapshot(rewind_snapshot, mask),
        provenance: Provenance::Winning,
        iteration,
        scope,
        seed: lineage_seed,
    })
}

/// Random ticket: the same mask with kept weights re-sampled from each
/// tensor's initializer under a fresh seed. Parameter counts match the
/// winning ticket exactly because the mask is shared.
pub fn make_random_ticket(
    mask: &PruneMask,
    registry: &ParamRegistry,
    fresh_seed: u64,
    iteration: usize,
    scope: PruneScope,
) -> PruneResult<Ticket> {
    if !mask.aligned_with(registry) {
        return Err(PruneError::Contract(
            "mask is not aligned with the registry".into(),
        ));
    }
    let entries = registry
        .entries()
        .iter()
        .map(|e| {
            // Same per-name stream derivation as registry initialization, so
            // the re-sample equals a fresh build at `fresh_seed`.
            let mut rng = Rng::from_seed(derive_seed(fresh_seed, &["init", &e.name]));
            (e.name.clone(), e.init.sample(e.tensor.shape(), &mut rng))
        })
        .collect();
    let resampled = ModelSnapshot::from_entries(entries);
    Ok(Ticket {
        mask: mask.clone(),
        weights: masked_snapshot(&resampled, mask),
        provenance: Provenance::Random,
        iteration,
        scope,
        seed: fresh_seed,
    })
}
