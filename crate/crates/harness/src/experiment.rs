//! The iterative-pruning experiment engine.
//!
//! Per seed: train the full model once (that run is also the unpruned
//! baseline), capturing the rewind-point snapshot. Then for k = 1..K, prune
//! the lineage's trained weights to the cumulative fraction r_k, build the
//! winning ticket from the lineage's rewind snapshot and a random ticket
//! from a derived fresh seed, evaluate both under the task's fixed budget,
//! persist everything, and continue the lineage from the winning ticket's
//! trained weights and its own newly-captured rewind snapshot.
//!
//! Every random stream is a pure function of (seed, iteration, role), so an
//! interrupted run resumed from disk produces byte-identical artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use lt_pruning::{
    global_magnitude_prune, make_random_ticket, make_winning_ticket, one_shot_prune,
    sparsity_report, ModelSnapshot, PruneMask, Provenance, Ticket,
};
use lt_tensor::derive_seed;

use crate::config::{ExperimentConfig, PruneMode};
use crate::error::{HarnessError, HarnessResult};
use crate::record::{RecordRow, RunRecord, SeedCell};
use crate::task::{EvalRun, TaskRunner};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub resume: bool,
    /// Stop after this pruning iteration (for resumability testing and
    /// staged long runs).
    pub stop_after: Option<usize>,
}

pub fn experiment_dir(out_root: &Path, cfg: &ExperimentConfig) -> PathBuf {
    out_root.join(&cfg.name)
}

fn seed_dir(exp_dir: &Path, seed: u64) -> PathBuf {
    exp_dir.join(format!("seed-{seed}"))
}

fn iter_dir(exp_dir: &Path, seed: u64, k: usize) -> PathBuf {
    seed_dir(exp_dir, seed).join(k.to_string())
}

/// Metric file: deterministic two-column CSV (no timing), parseable for
/// resume and verification.
fn write_metrics(path: &Path, pairs: &[(&str, String)]) -> HarnessResult<()> {
    let mut text = String::from("key,value\n");
    for (k, v) in pairs {
        text.push_str(&format!("{k},{v}\n"));
    }
    write_atomic(path, text.as_bytes())
}

fn read_metrics(path: &Path) -> HarnessResult<Vec<(String, String)>> {
    let text = fs::read_to_string(path)
        .map_err(|e| HarnessError::Integrity(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for line in text.lines().skip(1) {
        if let Some((k, v)) = line.split_once(',') {
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
    Ok(out)
}

fn metric_value(pairs: &[(String, String)], key: &str, path: &Path) -> HarnessResult<f64> {
    pairs
        .iter()
        .find(|(k, _)| k == key)
        .and_then(|(_, v)| v.parse().ok())
        .ok_or_else(|| {
            HarnessError::Integrity(format!("{}: missing or bad `{key}`", path.display()))
        })
}

fn write_atomic(path: &Path, bytes: &[u8]) -> HarnessResult<()> {
    let tmp = path.with_extension("tmp-write");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Outcome of one seed's lineage.
struct SeedOutcome {
    seed: u64,
    baseline: Option<f64>,
    /// k -> (winning metric, random metric, status, wall seconds)
    rows: Vec<(usize, Option<f64>, Option<f64>, String, f64)>,
    failure: Option<String>,
}

struct LineageState {
    registry: lt_models::ParamRegistry,
    mask: PruneMask,
    trained: ModelSnapshot,
    rewind: ModelSnapshot,
}

fn persist_eval(
    dir: &Path,
    name: &str,
    run: &EvalRun,
) -> HarnessResult<()> {
    write_atomic(
        &dir.join(format!("trace.{name}.csv")),
        run.trace.to_csv().as_bytes(),
    )
}

fn run_seed(
    cfg: &ExperimentConfig,
    task: &TaskRunner,
    exp_dir: &Path,
    seed: u64,
    options: &RunOptions,
) -> HarnessResult<SeedOutcome> {
    let sdir = seed_dir(exp_dir, seed);
    fs::create_dir_all(&sdir)?;
    let mut outcome = SeedOutcome {
        seed,
        baseline: None,
        rows: Vec::new(),
        failure: None,
    };

    // Full-model run (the unpruned baseline and the lineage root).
    let full_dir = sdir.join("full");
    fs::create_dir_all(&full_dir)?;
    let (mut registry, model) = task.build(seed)?;
    let init_snapshot = ModelSnapshot::from_registry(&registry);

    let full_done = full_dir.join("done");
    let (baseline_metric, full_trained, full_rewind) = if options.resume && full_done.is_file() {
        let pairs = read_metrics(&full_dir.join("metrics.csv"))?;
        let metric = metric_value(&pairs, "unpruned", &full_dir.join("metrics.csv"))?;
        let trained = ModelSnapshot::read_from(&full_dir.join("snapshot.trained"))
            .map_err(|e| HarnessError::Integrity(e.to_string()))?;
        let rewind = ModelSnapshot::read_from(&full_dir.join("snapshot.rewind"))
            .map_err(|e| HarnessError::Integrity(e.to_string()))?;
        if !trained.aligned_with(&registry) || !rewind.aligned_with(&registry) {
            return Err(HarnessError::Integrity(format!(
                "{}: persisted full-run snapshots do not align with the model",
                full_dir.display()
            )));
        }
        (metric, trained, rewind)
    } else {
        let run = task.evaluate(
            &model,
            &mut registry,
            None,
            Some(&cfg.rewind),
            derive_seed(seed, &["train", "0"]),
        )?;
        let rewind = run.rewind_snapshot.clone().unwrap_or_else(|| init_snapshot.clone());
        run.trained.write_to(&full_dir.join("snapshot.trained"))?;
        rewind.write_to(&full_dir.join("snapshot.rewind"))?;
        persist_eval(&full_dir, "unpruned", &run)?;
        write_metrics(
            &full_dir.join("metrics.csv"),
            &[("unpruned", format!("{}", run.metric))],
        )?;
        write_atomic(&full_done, b"ok\n")?;
        (run.metric, run.trained, rewind)
    };
    outcome.baseline = Some(baseline_metric);

    drop(model);
    let all_kept = PruneMask::all_kept(&registry);
    let mut lineage = LineageState {
        registry,
        mask: all_kept,
        trained: full_trained,
        rewind: full_rewind,
    };

    let last_k = options
        .stop_after
        .map(|s| s.min(cfg.schedule.iterations))
        .unwrap_or(cfg.schedule.iterations);

    for k in 1..=last_k {
        let kdir = iter_dir(exp_dir, seed, k);
        fs::create_dir_all(&kdir)?;
        let done = kdir.join("done");
        let r_k = cfg
            .schedule
            .cumulative_fraction(k)
            .map_err(|e| HarnessError::Run(e.to_string()))?;

        if options.resume && done.is_file() {
            let pairs = read_metrics(&kdir.join("metrics.csv"))?;
            let mpath = kdir.join("metrics.csv");
            let winning = metric_value(&pairs, "winning", &mpath)?;
            let random = if cfg.mode == PruneMode::Iterative {
                Some(metric_value(&pairs, "random", &mpath)?)
            } else {
                None
            };
            let mut mask = PruneMask::read_from(&kdir.join("mask"))
                .map_err(|e| HarnessError::Integrity(e.to_string()))?;
            mask.adopt_groups(&lineage.registry)
                .map_err(|e| HarnessError::Integrity(e.to_string()))?;
            if cfg.mode == PruneMode::Iterative {
                lineage.trained = ModelSnapshot::read_from(&kdir.join("snapshot.trained"))
                    .map_err(|e| HarnessError::Integrity(e.to_string()))?;
                lineage.rewind = ModelSnapshot::read_from(&kdir.join("snapshot.rewind"))
                    .map_err(|e| HarnessError::Integrity(e.to_string()))?;
            }
            lineage.mask = mask;
            outcome.rows.push((k, Some(winning), random, "ok".into(), 0.0));
            continue;
        }

        let started = Instant::now();
        let step = run_iteration(cfg, task, seed, k, r_k, &mut lineage, &kdir);
        match step {
            Ok((winning_metric, random_metric)) => {
                write_atomic(&done, b"ok\n")?;
                outcome.rows.push((
                    k,
                    Some(winning_metric),
                    random_metric,
                    "ok".into(),
                    started.elapsed().as_secs_f64(),
                ));
            }
            Err(e) => {
                let msg = e.to_string();
                outcome.rows.push((
                    k,
                    None,
                    None,
                    format!("failed: {msg}"),
                    started.elapsed().as_secs_f64(),
                ));
                outcome.failure = Some(msg);
                break;
            }
        }
    }
    Ok(outcome)
}

/// One pruning iteration: prune, build both tickets, evaluate, persist.
fn run_iteration(
    cfg: &ExperimentConfig,
    task: &TaskRunner,
    seed: u64,
    k: usize,
    r_k: f64,
    lineage: &mut LineageState,
    kdir: &Path,
) -> HarnessResult<(f64, Option<f64>)> {
    let mask = match cfg.mode {
        PruneMode::Iterative => {
            global_magnitude_prune(&lineage.trained, &lineage.mask, cfg.scope, r_k)?
        }
        // One-shot always prunes the single full-model training result.
        PruneMode::OneShot => one_shot_prune(&lineage.trained, &lineage.registry, cfg.scope, r_k)?,
    };
    mask.write_to(&kdir.join("mask"))?;

    let winning = make_winning_ticket(&mask, &lineage.rewind, k, cfg.scope, seed)?;
    winning.weights.write_to(&kdir.join("ticket.winning"))?;

    let random = if cfg.mode == PruneMode::Iterative {
        let fresh = derive_seed(seed, &[&k.to_string(), "random"]);
        let ticket = make_random_ticket(&mask, &lineage.registry, fresh, k, cfg.scope)?;
        ticket.weights.write_to(&kdir.join("ticket.random"))?;
        Some(ticket)
    } else {
        None
    };

    // Evaluate the winning ticket; its training continues the lineage.
    let winning_run = evaluate_ticket(cfg, task, seed, &winning, true)?;
    persist_eval(kdir, "winning", &winning_run)?;

    let mut metric_pairs = vec![
        ("r_k", format!("{r_k}")),
        (
            "kept_fraction",
            format!("{}", mask.global_kept_fraction()),
        ),
        (
            "in_scope_kept_fraction",
            format!("{}", sparsity_report(&mask, cfg.scope).in_scope_kept),
        ),
        ("winning", format!("{}", winning_run.metric)),
    ];

    let mut random_metric = None;
    if let Some(random_ticket) = &random {
        let random_run = evaluate_ticket(cfg, task, seed, random_ticket, false)?;
        persist_eval(kdir, "random", &random_run)?;
        metric_pairs.push(("random", format!("{}", random_run.metric)));
        random_metric = Some(random_run.metric);
    }

    if cfg.mode == PruneMode::Iterative {
        // The winning run's own rewind snapshot feeds iteration k+1.
        let rewind = winning_run
            .rewind_snapshot
            .clone()
            .unwrap_or_else(|| winning.weights.clone());
        winning_run.trained.write_to(&kdir.join("snapshot.trained"))?;
        rewind.write_to(&kdir.join("snapshot.rewind"))?;
        lineage.trained = winning_run.trained;
        lineage.rewind = rewind;
        lineage.mask = mask;
    }

    write_metrics(&kdir.join("metrics.csv"), &metric_pairs)?;
    Ok((winning_run.metric, random_metric))
}

fn evaluate_ticket(
    cfg: &ExperimentConfig,
    task: &TaskRunner,
    seed: u64,
    ticket: &Ticket,
    capture_rewind: bool,
) -> HarnessResult<EvalRun> {
    let (mut registry, model) = task.build(seed)?;
    lt_pruning::apply_ticket(&mut registry, ticket)?;
    let rewind = capture_rewind.then_some(&cfg.rewind);
    let label = match ticket.provenance {
        Provenance::Winning => "train",
        Provenance::Random => "random-train",
    };
    let stream_seed = derive_seed(seed, &[label, &ticket.iteration.to_string()]);
    task.evaluate(&model, &mut registry, Some(&ticket.mask), rewind, stream_seed)
}

/// Execute an experiment across its seed list. Seeds run on parallel
/// threads; each owns its output subtree exclusively.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out_root: &Path,
    options: &RunOptions,
) -> HarnessResult<RunRecord> {
    let exp_dir = experiment_dir(out_root, cfg);
    fs::create_dir_all(&exp_dir)?;

    // Persist (or check) the canonical config for provenance and resume.
    let config_path = exp_dir.join("config.txt");
    if config_path.is_file() {
        let existing = fs::read_to_string(&config_path)?;
        if existing != cfg.canonical_text() {
            return Err(HarnessError::Integrity(format!(
                "{} already holds a different configuration; refusing to mix",
                exp_dir.display()
            )));
        }
    } else {
        write_atomic(&config_path, cfg.canonical_text().as_bytes())?;
    }

    let task = TaskRunner::prepare(&cfg.task)?;

    let outcomes: Vec<HarnessResult<SeedOutcome>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .seeds
            .iter()
            .map(|&seed| {
                let task = &task;
                let exp_dir = exp_dir.clone();
                scope.spawn(move || run_seed(cfg, task, &exp_dir, seed, options))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("seed thread")).collect()
    });

    let mut record = RunRecord {
        config_hash: cfg.hash(),
        experiment: cfg.name.clone(),
        task: cfg.task.name().to_string(),
        metric_name: cfg.task.metric_name().to_string(),
        variant: cfg.variant().name().to_string(),
        seeds: cfg.seeds.clone(),
        baseline: Vec::new(),
        rows: Vec::new(),
    };

    let last_k = options
        .stop_after
        .map(|s| s.min(cfg.schedule.iterations))
        .unwrap_or(cfg.schedule.iterations);
    for k in 1..=last_k {
        record.rows.push(RecordRow {
            k,
            r_k: cfg.schedule.cumulative_fraction(k).unwrap(),
            kept_fraction: f64::NAN,
            cells: Vec::new(),
        });
    }

    for outcome in outcomes {
        let outcome = outcome?;
        if let Some(b) = outcome.baseline {
            record.baseline.push((outcome.seed, b));
        }
        for (k, winning, random, status, wall) in outcome.rows {
            let row = &mut record.rows[k - 1];
            row.cells.push(SeedCell {
                seed: outcome.seed,
                winning,
                random,
                status,
                wall_secs: wall,
            });
        }
    }

    // Kept fraction is seed-independent given exact counts; read it back
    // from the first seed's metrics.
    for row in &mut record.rows {
        let path = iter_dir(&exp_dir, cfg.seeds[0], row.k).join("metrics.csv");
        if path.is_file() {
            let pairs = read_metrics(&path)?;
            row.kept_fraction = metric_value(&pairs, "kept_fraction", &path).unwrap_or(f64::NAN);
        }
    }
    record.rows.retain(|r| !r.cells.is_empty());

    record.write_to(&exp_dir.join("record.txt"))?;
    Ok(record)
}
