//! Offline consistency checking of persisted experiment trees.
//!
//! Works from the files alone (plus the persisted canonical config):
//! mask nesting along each seed's lineage, ticket zeros against masks,
//! winning-ticket kept weights against the previous iteration's rewind
//! snapshot, schedule conformance, and exact pruned counts.

use std::path::Path;

use lt_pruning::{ModelSnapshot, PruneMask};

use crate::config::{ExperimentConfig, PruneMode};
use crate::error::{HarnessError, HarnessResult};
use crate::record::RunRecord;
use crate::task::TaskRunner;

pub struct VerifyReport {
    pub checks: usize,
    pub problems: Vec<String>,
}

pub fn verify_experiment(exp_dir: &Path) -> HarnessResult<VerifyReport> {
    let mut report = VerifyReport {
        checks: 0,
        problems: Vec::new(),
    };
    let cfg = ExperimentConfig::from_file(&exp_dir.join("config.txt"))?;
    let record_path = exp_dir.join("record.txt");
    let record = record_path
        .is_file()
        .then(|| RunRecord::read_from(&record_path))
        .transpose()?;
    let task = TaskRunner::prepare(&cfg.task)?;

    if let Some(record) = &record {
        report.checks += 1;
        if record.config_hash != cfg.hash() {
            report
                .problems
                .push("record config_hash does not match config.txt".into());
        }
        // Schedule conformance to 1e-12.
        for row in &record.rows {
            report.checks += 1;
            let want = cfg.schedule.cumulative_fraction(row.k).map_err(|e| {
                HarnessError::Integrity(format!("record row {}: {e}", row.k))
            })?;
            if (row.r_k - want).abs() > 1e-12 {
                report
                    .problems
                    .push(format!("row {}: r_k {} != schedule {}", row.k, row.r_k, want));
            }
        }
    }

    for &seed in &cfg.seeds {
        let sdir = exp_dir.join(format!("seed-{seed}"));
        if !sdir.is_dir() {
            continue;
        }
        let (registry, _) = task.build(seed)?;
        let mut prev_mask = PruneMask::all_kept(&registry);
        // The rewind snapshot that fed iteration k's winning ticket.
        let full_rewind = sdir.join("full").join("snapshot.rewind");
        let mut prev_rewind = full_rewind
            .is_file()
            .then(|| ModelSnapshot::read_from(&full_rewind))
            .transpose()
            .map_err(|e| HarnessError::Integrity(e.to_string()))?;

        for k in 1..=cfg.schedule.iterations {
            let kdir = sdir.join(k.to_string());
            if !kdir.join("done").is_file() {
                break;
            }
            let mut mask = PruneMask::read_from(&kdir.join("mask"))
                .map_err(|e| HarnessError::Integrity(e.to_string()))?;
            mask.adopt_groups(&registry)
                .map_err(|e| HarnessError::Integrity(e.to_string()))?;

            report.checks += 1;
            if mask.validate().is_err() {
                report
                    .problems
                    .push(format!("seed {seed} k {k}: mask counts inconsistent"));
            }

            // Nesting.
            report.checks += 1;
            if !mask.is_subset_of(&prev_mask) {
                report
                    .problems
                    .push(format!("seed {seed} k {k}: mask is not nested in k-1"));
            }

            // Exact global count within scope.
            report.checks += 1;
            let r_k = cfg.schedule.cumulative_fraction(k).unwrap();
            let (kept, total) = mask.scope_counts(cfg.scope);
            let want_pruned = (r_k * total as f64 + 0.5).floor() as usize;
            if total - kept != want_pruned {
                report.problems.push(format!(
                    "seed {seed} k {k}: pruned {} != round(r_k * {total}) = {want_pruned}",
                    total - kept
                ));
            }

            // Ticket zeros + rewind fidelity.
            for name in ["ticket.winning", "ticket.random"] {
                let tpath = kdir.join(name);
                if !tpath.is_file() {
                    continue;
                }
                let ticket = ModelSnapshot::read_from(&tpath)
                    .map_err(|e| HarnessError::Integrity(e.to_string()))?;
                report.checks += 1;
                let mut zero_ok = true;
                for ((_, tensor), mask_entry) in ticket.entries().iter().zip(mask.entries()) {
                    for (&w, &keephere) in tensor.data().iter().zip(&mask_entry.keep) {
                        if !keephere && w != 0.0 {
                            zero_ok = false;
                        }
                    }
                }
                if !zero_ok {
                    report
                        .problems
                        .push(format!("seed {seed} k {k}: {name} has nonzero pruned weights"));
                }
                if name == "ticket.winning" {
                    if let Some(rewind) = &prev_rewind {
                        report.checks += 1;
                        let mut fidelity = true;
                        for (((_, got), (_, want)), mask_entry) in ticket
                            .entries()
                            .iter()
                            .zip(rewind.entries())
                            .zip(mask.entries())
                        {
                            for (i, &keephere) in mask_entry.keep.iter().enumerate() {
                                if keephere
                                    && got.data()[i].to_bits() != want.data()[i].to_bits()
                                {
                                    fidelity = false;
                                }
                            }
                        }
                        if !fidelity {
                            report.problems.push(format!(
                                "seed {seed} k {k}: winning ticket kept weights differ from the rewind snapshot"
                            ));
                        }
                    }
                }
            }

            prev_mask = mask;
            if cfg.mode == PruneMode::Iterative {
                let next_rewind = kdir.join("snapshot.rewind");
                prev_rewind = next_rewind
                    .is_file()
                    .then(|| ModelSnapshot::read_from(&next_rewind))
                    .transpose()
                    .map_err(|e| HarnessError::Integrity(e.to_string()))?;
            }
        }
    }
    Ok(report)
}
