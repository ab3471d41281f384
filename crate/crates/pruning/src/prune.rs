use lt_models::PruneGroup;

use crate::error::{PruneError, PruneResult};
use crate::mask::PruneMask;
use crate::snapshot::ModelSnapshot;

/// Which parameters participate in pruning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneScope {
    /// Every parameter, biases included.
    All,
    /// Everything except embedding tables, which stay intact.
    ExcludeEmbedding,
}

impl PruneScope {
    pub fn includes(&self, group: PruneGroup) -> bool {
        match self {
            PruneScope::All => true,
            PruneScope::ExcludeEmbedding => group != PruneGroup::Embedding,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PruneScope::All => "all",
            PruneScope::ExcludeEmbedding => "exclude-embedding",
        }
    }
}

/// round-half-up of `fraction * count`
fn target_count(fraction: f64, count: usize) -> usize {
    (fraction * count as f64 + 0.5).floor() as usize
}

/// Global magnitude pruning: pool every still-kept in-scope weight across
/// all tensors, order by |value|, and prune the smallest until the global
/// pruned count reaches round(target * in-scope total).
///
/// Ties are broken by (registry entry order, flat index); among equal
/// magnitudes, earlier indices are pruned first. The returned mask is an
/// elementwise subset of `current`; out-of-scope entries are untouched.
pub fn global_magnitude_prune(
    trained: &ModelSnapshot,
    current: &PruneMask,
    scope: PruneScope,
    target_fraction: f64,
) -> PruneResult<PruneMask> {
    if !(0.0..1.0).contains(&target_fraction) {
        return Err(PruneError::Contract(format!(
            "target fraction {target_fraction} outside [0, 1)"
        )));
    }
    let aligned = trained.entries().len() == current.entries().len()
        && trained
            .entries()
            .iter()
            .zip(current.entries())
            .all(|((n, t), m)| *n == m.name && t.shape() == m.shape);
    if !aligned {
        return Err(PruneError::Contract(
            "trained snapshot is not aligned with the mask".into(),
        ));
    }
    current.validate()?;

    let (in_scope_kept, in_scope_total) = current.scope_counts(scope);
    let already_pruned = in_scope_total - in_scope_kept;
    let want_pruned = target_count(target_fraction, in_scope_total);
    if want_pruned < already_pruned {
        return Err(PruneError::Contract(format!(
            "target fraction {target_fraction} is below the current pruned \
             fraction ({already_pruned}/{in_scope_total})"
        )));
    }
    let to_prune = want_pruned - already_pruned;

    let mut result = current.clone();
    if to_prune == 0 {
        return Ok(result);
    }

    // Pool candidates: (|w|, entry order, flat index) over kept in-scope
    // positions.
    let mut candidates: Vec<(f64, u32, u32)> = Vec::with_capacity(in_scope_kept);
    for (ei, ((_, tensor), mask_entry)) in
        trained.entries().iter().zip(current.entries()).enumerate()
    {
        if !scope.includes(mask_entry.group) {
            continue;
        }
        for (fi, (&w, &keep)) in tensor.data().iter().zip(&mask_entry.keep).enumerate() {
            if keep {
                candidates.push((w.abs(), ei as u32, fi as u32));
            }
        }
    }
    debug_assert_eq!(candidates.len(), in_scope_kept);
    candidates.sort_unstable_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then_with(|| a.1.cmp(&b.1))
            .then_with(|| a.2.cmp(&b.2))
    });

    for &(_, ei, fi) in candidates.iter().take(to_prune) {
        result.entries_mut()[ei as usize].keep[fi as usize] = false;
    }
    result.recount();
    debug_assert!(result.is_subset_of(current));
    Ok(result)
}

/// One-shot pruning: a single global magnitude prune from the all-kept mask
/// of a trained model.
pub fn one_shot_prune(
    trained: &ModelSnapshot,
    registry: &lt_models::ParamRegistry,
    scope: PruneScope,
    target_fraction: f64,
) -> PruneResult<PruneMask> {
    if !trained.aligned_with(registry) {
        return Err(PruneError::Contract(
            "trained snapshot is not aligned with the registry".into(),
        ));
    }
    let all = PruneMask::all_kept(registry);
    global_magnitude_prune(trained, &all, scope, target_fraction)
}
