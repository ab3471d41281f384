//! Shared fixtures: random registries and the brute-force pruning oracle.
#![allow(dead_code)]

use lt_models::{InitSpec, ParamRegistry, PruneGroup};
use lt_pruning::{ModelSnapshot, PruneMask, PruneScope};
#[allow(unused_imports)]
use lt_tensor::{Rng, Tensor};

/// Registry with literal values, every entry core scope.
pub fn registry_from(entries: &[(&str, Vec<f64>)]) -> ParamRegistry {
    let mut reg = ParamRegistry::new(0);
    for (name, values) in entries {
        reg.add(
            name,
            &[values.len()],
            InitSpec::UniformFanIn { bound: 1.0 },
            PruneGroup::Core,
        )
        .unwrap();
        reg.set_tensor(name, Tensor::from_vec(values.clone())).unwrap();
    }
    reg
}

/// Random registry of `tensors` entries summing to about `total` params.
/// The first entry is tagged as an embedding so scope filtering gets
/// exercised.
pub fn random_registry(rng: &mut Rng, tensors: usize, total: usize) -> ParamRegistry {
    let mut reg = ParamRegistry::new(rng.next_u64());
    let per = (total / tensors).max(2);
    for i in 0..tensors {
        let rows = 1 + rng.below(per.min(40));
        let cols = (per / rows).max(1);
        let group = if i == 0 {
            PruneGroup::Embedding
        } else {
            PruneGroup::Core
        };
        reg.add(
            &format!("t{i}"),
            &[rows, cols],
            InitSpec::UniformFanIn { bound: 1.0 },
            group,
        )
        .unwrap();
    }
    reg
}

/// Snapshot with fresh random values over a registry's shapes.
pub fn random_snapshot(reg: &ParamRegistry, rng: &mut Rng) -> ModelSnapshot {
    let entries = reg
        .entries()
        .iter()
        .map(|e| {
            let data = (0..e.tensor.len()).map(|_| rng.uniform(-1.0, 1.0)).collect();
            (
                e.name.clone(),
                Tensor::new(e.tensor.shape().to_vec(), data).unwrap(),
            )
        })
        .collect();
    ModelSnapshot::from_entries(entries)
}

/// Brute-force oracle: full sort of every kept in-scope (|w|, entry, flat)
/// triple, prune the first round(target * in-scope-total) - already-pruned.
/// Written independently of the production path.
pub fn oracle_prune(
    snap: &ModelSnapshot,
    current: &PruneMask,
    scope: PruneScope,
    target: f64,
) -> PruneMask {
    let mut triples: Vec<(f64, usize, usize)> = Vec::new();
    let mut in_scope_total = 0usize;
    let mut already_pruned = 0usize;
    for (ei, ((_, tensor), entry)) in snap.entries().iter().zip(current.entries()).enumerate() {
        if !scope.includes(entry.group) {
            continue;
        }
        in_scope_total += entry.total();
        for (fi, (&w, &keep)) in tensor.data().iter().zip(&entry.keep).enumerate() {
            if keep {
                triples.push((w.abs(), ei, fi));
            } else {
                already_pruned += 1;
            }
        }
    }
    triples.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let want = (target * in_scope_total as f64 + 0.5).floor() as usize;
    let n = want.saturating_sub(already_pruned);

    let mut keeps: Vec<(String, Vec<usize>, Vec<bool>, PruneGroup)> = current
        .entries()
        .iter()
        .map(|e| (e.name.clone(), e.shape.clone(), e.keep.clone(), e.group))
        .collect();
    for &(_, ei, fi) in triples.iter().take(n) {
        keeps[ei].2[fi] = false;
    }
    PruneMask::from_keep_vectors(keeps)
}

pub fn assert_masks_equal(a: &PruneMask, b: &PruneMask) {
    assert_eq!(a.entries().len(), b.entries().len());
    for (x, y) in a.entries().iter().zip(b.entries()) {
        assert_eq!(x.name, y.name);
        assert_eq!(x.keep, y.keep, "bits differ for `{}`", x.name);
        assert_eq!(x.kept(), y.kept());
    }
}
