//! Human-readable sparsity reports for mask, snapshot and ticket files.

use std::io::Read;
use std::path::Path;

use lt_pruning::{ModelSnapshot, PruneMask};

use crate::error::{HarnessError, HarnessResult};

pub fn inspect_file(path: &Path) -> HarnessResult<String> {
    let mut magic = [0u8; 7];
    std::fs::File::open(path)?
        .read_exact(&mut magic)
        .map_err(|e| HarnessError::Usage(format!("{}: {e}", path.display())))?;
    match &magic {
        b"LTMASK1" => {
            let mask = PruneMask::read_from(path).map_err(|e| HarnessError::Run(e.to_string()))?;
            let mut out = format!(
                "mask {} | {} tensors, {} of {} kept (global kept fraction {:.6})\n",
                path.display(),
                mask.entries().len(),
                mask.kept(),
                mask.total(),
                mask.global_kept_fraction()
            );
            for e in mask.entries() {
                out.push_str(&format!(
                    "  {:<24} {:>10} / {:<10} kept ({:.6})\n",
                    e.name,
                    e.kept(),
                    e.total(),
                    e.kept() as f64 / e.total() as f64
                ));
            }
            Ok(out)
        }
        b"LTSNAP1" => {
            // Persisted tickets store pruned positions as literal zeros, so
            // sparsity is auditable straight from the snapshot.
            let snap =
                ModelSnapshot::read_from(path).map_err(|e| HarnessError::Run(e.to_string()))?;
            let total = snap.total_params();
            let nonzero: usize = snap
                .entries()
                .iter()
                .map(|(_, t)| t.data().iter().filter(|&&v| v != 0.0).count())
                .sum();
            let mut out = format!(
                "snapshot {} | {} tensors, {} of {} nonzero (kept fraction {:.6} if zeros are pruned)\n",
                path.display(),
                snap.entries().len(),
                nonzero,
                total,
                nonzero as f64 / total as f64
            );
            for (name, t) in snap.entries() {
                let nz = t.data().iter().filter(|&&v| v != 0.0).count();
                out.push_str(&format!(
                    "  {:<24} {:>10} / {:<10} nonzero ({:.6}) shape {:?}\n",
                    name,
                    nz,
                    t.len(),
                    nz as f64 / t.len() as f64,
                    t.shape()
                ));
            }
            Ok(out)
        }
        _ => Err(HarnessError::Usage(format!(
            "{}: not a mask or snapshot file",
            path.display()
        ))),
    }
}
