//! Persisted per-experiment summaries.
//!
//! `record.txt` is flat key=value text. Schema (one line each):
//!   config_hash, experiment, task, metric, variant, seeds
//!   baseline.<seed> = <metric>
//!   row.<k>.r_k / row.<k>.kept_fraction
//!   row.<k>.<seed>.winning / .random / .status / .wall_secs
//! Wall times are informational only (0 for rows loaded from a resumed
//! run); everything else is deterministic.

use std::path::Path;

use crate::error::{HarnessError, HarnessResult};

#[derive(Debug, Clone, PartialEq)]
pub struct SeedCell {
    pub seed: u64,
    pub winning: Option<f64>,
    pub random: Option<f64>,
    pub status: String,
    pub wall_secs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordRow {
    pub k: usize,
    pub r_k: f64,
    /// Whole-model kept fraction at this iteration.
    pub kept_fraction: f64,
    pub cells: Vec<SeedCell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub config_hash: String,
    pub experiment: String,
    pub task: String,
    pub metric_name: String,
    pub variant: String,
    pub seeds: Vec<u64>,
    pub baseline: Vec<(u64, f64)>,
    pub rows: Vec<RecordRow>,
}

impl RunRecord {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("config_hash = {}\n", self.config_hash));
        out.push_str(&format!("experiment = {}\n", self.experiment));
        out.push_str(&format!("task = {}\n", self.task));
        out.push_str(&format!("metric = {}\n", self.metric_name));
        out.push_str(&format!("variant = {}\n", self.variant));
        let seeds = self
            .seeds
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(",");
        out.push_str(&format!("seeds = {seeds}\n"));
        for (seed, v) in &self.baseline {
            out.push_str(&format!("baseline.{seed} = {v}\n"));
        }
        for row in &self.rows {
            out.push_str(&format!("row.{}.r_k = {}\n", row.k, row.r_k));
            out.push_str(&format!(
                "row.{}.kept_fraction = {}\n",
                row.k, row.kept_fraction
            ));
            for cell in &row.cells {
                let prefix = format!("row.{}.{}", row.k, cell.seed);
                if let Some(w) = cell.winning {
                    out.push_str(&format!("{prefix}.winning = {w}\n"));
                }
                if let Some(r) = cell.random {
                    out.push_str(&format!("{prefix}.random = {r}\n"));
                }
                out.push_str(&format!("{prefix}.status = {}\n", cell.status));
                out.push_str(&format!("{prefix}.wall_secs = {:.3}\n", cell.wall_secs));
            }
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> HarnessResult<()> {
        let tmp = path.with_extension("tmp-write");
        std::fs::write(&tmp, self.to_text())?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> HarnessResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Integrity(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
            .map_err(|e| HarnessError::Integrity(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut record = RunRecord {
            config_hash: String::new(),
            experiment: String::new(),
            task: String::new(),
            metric_name: String::new(),
            variant: String::new(),
            seeds: Vec::new(),
            baseline: Vec::new(),
            rows: Vec::new(),
        };
        let mut cells: Vec<(usize, u64, String, String)> = Vec::new();
        for line in text.lines() {
            let Some((key, value)) = line.split_once('=') else {
                continue;
            };
            let key = key.trim();
            let value = value.trim().to_string();
            let parts: Vec<&str> = key.split('.').collect();
            match parts.as_slice() {
                ["config_hash"] => record.config_hash = value,
                ["experiment"] => record.experiment = value,
                ["task"] => record.task = value,
                ["metric"] => record.metric_name = value,
                ["variant"] => record.variant = value,
                ["seeds"] => {
                    record.seeds = value
                        .split(',')
                        .map(|s| s.trim().parse().map_err(|_| format!("bad seed {s}")))
                        .collect::<Result<_, _>>()?;
                }
                ["baseline", seed] => {
                    let seed: u64 = seed.parse().map_err(|_| format!("bad key {key}"))?;
                    let v: f64 = value.parse().map_err(|_| format!("bad value for {key}"))?;
                    record.baseline.push((seed, v));
                }
                ["row", k, field @ ("r_k" | "kept_fraction")] => {
                    let k: usize = k.parse().map_err(|_| format!("bad key {key}"))?;
                    let v: f64 = value.parse().map_err(|_| format!("bad value for {key}"))?;
                    let row = ensure_row(&mut record.rows, k);
                    if *field == "r_k" {
                        row.r_k = v;
                    } else {
                        row.kept_fraction = v;
                    }
                }
                ["row", k, seed, field] => {
                    let k: usize = k.parse().map_err(|_| format!("bad key {key}"))?;
                    let seed: u64 = seed.parse().map_err(|_| format!("bad key {key}"))?;
                    cells.push((k, seed, field.to_string(), value));
                }
                _ => return Err(format!("unrecognized key `{key}`")),
            }
        }
        for (k, seed, field, value) in cells {
            let row = ensure_row(&mut record.rows, k);
            let cell = match row.cells.iter_mut().find(|c| c.seed == seed) {
                Some(c) => c,
                None => {
                    row.cells.push(SeedCell {
                        seed,
                        winning: None,
                        random: None,
                        status: String::new(),
                        wall_secs: 0.0,
                    });
                    row.cells.last_mut().unwrap()
                }
            };
            match field.as_str() {
                "winning" => cell.winning = value.parse().ok(),
                "random" => cell.random = value.parse().ok(),
                "status" => cell.status = value,
                "wall_secs" => cell.wall_secs = value.parse().unwrap_or(0.0),
                _ => return Err(format!("unrecognized row field `{field}`")),
            }
        }
        record.rows.sort_by_key(|r| r.k);
        Ok(record)
    }
}

fn ensure_row(rows: &mut Vec<RecordRow>, k: usize) -> &mut RecordRow {
    if let Some(i) = rows.iter().position(|r| r.k == k) {
        return &mut rows[i];
    }
    rows.push(RecordRow {
        k,
        r_k: f64::NAN,
        kept_fraction: f64::NAN,
        cells: Vec::new(),
    });
    rows.last_mut().unwrap()
}
