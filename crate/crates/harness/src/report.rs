//! Pruning-curve aggregation: per (pruned fraction, ticket type, variant),
//! the mean and sample standard deviation of the seed metrics.

use crate::error::{HarnessError, HarnessResult};
use crate::record::RunRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub pruned_fraction: f64,
    pub ticket_type: String,
    pub metric_mean: f64,
    pub metric_std: f64,
    pub n_seeds: usize,
    pub variant: String,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Aggregate one or more records (same task and metric) into curve rows,
/// sorted ascending by pruned fraction, then ticket type, then variant.
/// Rows with failed seeds aggregate over the seeds that succeeded.
pub fn emit_report(records: &[RunRecord]) -> HarnessResult<Vec<CurveRow>> {
    if records.is_empty() {
        return Err(HarnessError::Usage("no records to aggregate".into()));
    }
    let metric = &records[0].metric_name;
    let task = &records[0].task;
    for r in records {
        if &r.metric_name != metric || &r.task != task {
            return Err(HarnessError::Usage(format!(
                "records mix tasks or metrics: {}/{} vs {}/{}",
                task, metric, r.task, r.metric_name
            )));
        }
    }

    let mut rows = Vec::new();
    for record in records {
        // Unpruned baseline row at fraction 0.
        let baseline: Vec<f64> = record.baseline.iter().map(|(_, v)| *v).collect();
        if !baseline.is_empty() {
            let (mean, std) = mean_std(&baseline);
            rows.push(CurveRow {
                pruned_fraction: 0.0,
                ticket_type: "unpruned".into(),
                metric_mean: mean,
                metric_std: std,
                n_seeds: baseline.len(),
                variant: record.variant.clone(),
            });
        }
        for row in &record.rows {
            let winning: Vec<f64> = row
                .cells
                .iter()
                .filter(|c| c.status == "ok")
                .filter_map(|c| c.winning)
                .collect();
            if !winning.is_empty() {
                let (mean, std) = mean_std(&winning);
                rows.push(CurveRow {
                    pruned_fraction: row.r_k,
                    ticket_type: "winning".into(),
                    metric_mean: mean,
                    metric_std: std,
                    n_seeds: winning.len(),
                    variant: record.variant.clone(),
                });
            }
            let random: Vec<f64> = row
                .cells
                .iter()
                .filter(|c| c.status == "ok")
                .filter_map(|c| c.random)
                .collect();
            if !random.is_empty() {
                let (mean, std) = mean_std(&random);
                rows.push(CurveRow {
                    pruned_fraction: row.r_k,
                    ticket_type: "random".into(),
                    metric_mean: mean,
                    metric_std: std,
                    n_seeds: random.len(),
                    variant: record.variant.clone(),
                });
            }
        }
    }
    rows.sort_by(|a, b| {
        a.pruned_fraction
            .total_cmp(&b.pruned_fraction)
            .then_with(|| a.ticket_type.cmp(&b.ticket_type))
            .then_with(|| a.variant.cmp(&b.variant))
    });
    Ok(rows)
}

pub fn curves_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("pruned_fraction,ticket_type,metric_mean,metric_std,n_seeds,variant\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.pruned_fraction, r.ticket_type, r.metric_mean, r.metric_std, r.n_seeds, r.variant
        ));
    }
    out
}
