use std::collections::HashMap;
use std::fs;
use std::io::Read;
use std::path::Path;

use lt_models::{ParamRegistry, PruneGroup};

use crate::error::{PruneError, PruneResult};
use crate::prune::PruneScope;
use crate::snapshot::{atomic_write, write_u32, Reader};

const MASK_MAGIC: &[u8; 7] = b"LTMASK1";

/// Keep/prune bits for one registry entry (true = keep).
#[derive(Debug, Clone, PartialEq)]
pub struct MaskEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub keep: Vec<bool>,
    pub group: PruneGroup,
    kept: usize,
}

impl MaskEntry {
    fn new(name: String, shape: Vec<usize>, keep: Vec<bool>, group: PruneGroup) -> Self {
        let kept = keep.iter().filter(|&&k| k).count();
        MaskEntry {
            name,
            shape,
            keep,
            group,
            kept,
        }
    }

    pub fn kept(&self) -> usize {
        self.kept
    }

    pub fn total(&self) -> usize {
        self.keep.len()
    }
}

/// Per-tensor binary keep indicators with cached sparsity accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct PruneMask {
    entries: Vec<MaskEntry>,
    index: HashMap<String, usize>,
}

impl PruneMask {
    /// All-kept mask aligned to a registry.
    pub fn all_kept(reg: &ParamRegistry) -> Self {
        let entries: Vec<MaskEntry> = reg
            .entries()
            .iter()
            .map(|e| {
                MaskEntry::new(
                    e.name.clone(),
                    e.tensor.shape().to_vec(),
                    vec![true; e.tensor.len()],
                    e.group,
                )
            })
            .collect();
        Self::from_entries(entries)
    }

    pub fn from_entries(entries: Vec<MaskEntry>) -> Self {
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.name.clone(), i))
            .collect();
        PruneMask { entries, index }
    }

    /// Build a mask from raw keep vectors; counts are derived here.
    pub fn from_keep_vectors(parts: Vec<(String, Vec<usize>, Vec<bool>, PruneGroup)>) -> Self {
        Self::from_entries(
            parts
                .into_iter()
                .map(|(name, shape, keep, group)| MaskEntry::new(name, shape, keep, group))
                .collect(),
        )
    }

    pub fn entries(&self) -> &[MaskEntry] {
        &self.entries
    }

    pub fn entry(&self, name: &str) -> Option<&MaskEntry> {
        self.index.get(name).map(|&i| &self.entries[i])
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [MaskEntry] {
        &mut self.entries
    }

    pub(crate) fn recount(&mut self) {
        for e in &mut self.entries {
            e.kept = e.keep.iter().filter(|&&k| k).count();
        }
    }

    pub fn total(&self) -> usize {
        self.entries.iter().map(|e| e.total()).sum()
    }

    pub fn kept(&self) -> usize {
        self.entries.iter().map(|e| e.kept()).sum()
    }

    pub fn pruned(&self) -> usize {
        self.total() - self.kept()
    }

    pub fn global_kept_fraction(&self) -> f64 {
        self.kept() as f64 / self.total() as f64
    }

    /// Totals restricted to a scope: (kept, total).
    pub fn scope_counts(&self, scope: PruneScope) -> (usize, usize) {
        self.entries
            .iter()
            .filter(|e| scope.includes(e.group))
            .fold((0, 0), |(k, t), e| (k + e.kept(), t + e.total()))
    }

    /// Cached counts equal recomputed counts.
    pub fn validate(&self) -> PruneResult<()> {
        for e in &self.entries {
            let actual = e.keep.iter().filter(|&&k| k).count();
            if actual != e.kept {
                return Err(PruneError::InvariantViolation(format!(
                    "cached kept count {} != recomputed {} for `{}`",
                    e.kept, actual, e.name
                )));
            }
        }
        Ok(())
    }

    /// Name/shape alignment against a registry.
    pub fn aligned_with(&self, reg: &ParamRegistry) -> bool {
        reg.len() == self.entries.len()
            && self
                .entries
                .iter()
                .zip(reg.entries())
                .all(|(m, e)| m.name == e.name && m.shape == e.tensor.shape())
    }

    /// Elementwise subset test: every bit kept here is kept in `other`.
    pub fn is_subset_of(&self, other: &PruneMask) -> bool {
        self.entries.len() == other.entries.len()
            && self.entries.iter().zip(&other.entries).all(|(a, b)| {
                a.name == b.name
                    && a.keep.len() == b.keep.len()
                    && a.keep.iter().zip(&b.keep).all(|(&x, &y)| !x || y)
            })
    }

    /// Copy groups from a registry (used after loading from a file, which
    /// does not store groups).
    pub fn adopt_groups(&mut self, reg: &ParamRegistry) -> PruneResult<()> {
        if !self.aligned_with(reg) {
            return Err(PruneError::Contract(
                "mask is not aligned with the registry".into(),
            ));
        }
        for (m, e) in self.entries.iter_mut().zip(reg.entries()) {
            m.group = e.group;
        }
        Ok(())
    }

    pub fn write_to(&self, path: &Path) -> PruneResult<()> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MASK_MAGIC);
        write_u32(&mut buf, self.entries.len() as u32);
        for e in &self.entries {
            write_u32(&mut buf, e.name.len() as u32);
            buf.extend_from_slice(e.name.as_bytes());
            write_u32(&mut buf, e.shape.len() as u32);
            for &d in &e.shape {
                write_u32(&mut buf, d as u32);
            }
            // Keep bits packed LSB-first, padded to a byte boundary.
            let mut byte = 0u8;
            for (i, &k) in e.keep.iter().enumerate() {
                if k {
                    byte |= 1 << (i % 8);
                }
                if i % 8 == 7 {
                    buf.push(byte);
                    byte = 0;
                }
            }
            if e.keep.len() % 8 != 0 {
                buf.push(byte);
            }
        }
        atomic_write(path, &buf)
    }

    /// Read a mask file. Groups default to core; call [`adopt_groups`]
    /// against the owning registry when scope information matters.
    ///
    /// [`adopt_groups`]: PruneMask::adopt_groups
    pub fn read_from(path: &Path) -> PruneResult<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        let mut r = Reader::new(&bytes, path);
        r.expect_magic(MASK_MAGIC)?;
        let count = r.u32()? as usize;
        let mut entries = Vec::with_capacity(count);
        for _ in 0..count {
            let name_len = r.u32()? as usize;
            let name = r.str_bytes(name_len)?;
            let rank = r.u32()? as usize;
            let mut shape = Vec::with_capacity(rank);
            for _ in 0..rank {
                shape.push(r.u32()? as usize);
            }
            let len: usize = shape.iter().product();
            let packed = r.raw(len.div_ceil(8))?;
            let mut keep = Vec::with_capacity(len);
            for i in 0..len {
                keep.push(packed[i / 8] >> (i % 8) & 1 == 1);
            }
            entries.push(MaskEntry::new(name, shape, keep, PruneGroup::Core));
        }
        r.expect_end()?;
        Ok(Self::from_entries(entries))
    }
}

/// Per-tensor and global kept fractions for a mask under a scope.
#[derive(Debug, Clone)]
pub struct SparsityReport {
    /// (name, kept, total, kept fraction) per entry.
    pub per_entry: Vec<(String, usize, usize, f64)>,
    /// Kept fraction over every parameter.
    pub whole_model_kept: f64,
    /// Kept fraction over in-scope parameters only.
    pub in_scope_kept: f64,
    pub scope: PruneScope,
}

/// Sparsity accounting for a mask. Under an embedding-excluding scope both
/// the in-scope fraction and the whole-model fraction are reported.
pub fn sparsity_report(mask: &PruneMask, scope: PruneScope) -> SparsityReport {
    let per_entry = mask
        .entries()
        .iter()
        .map(|e| {
            (
                e.name.clone(),
                e.kept(),
                e.total(),
                e.kept() as f64 / e.total() as f64,
            )
        })
        .collect();
    let (scope_kept, scope_total) = mask.scope_counts(scope);
    SparsityReport {
        per_entry,
        whole_model_kept: mask.global_kept_fraction(),
        in_scope_kept: scope_kept as f64 / scope_total.max(1) as f64,
        scope,
    }
}
