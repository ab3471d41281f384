use std::path::{Path, PathBuf};
use std::process::ExitCode;

use lt_harness::report::curves_csv;
use lt_harness::verify::verify_experiment;
use lt_harness::{
    emit_report, inspect, run_experiment, ExperimentConfig, HarnessError, HarnessResult,
    RunOptions, RunRecord, Variant,
};

const USAGE: &str = "\
ticketlab - iterative magnitude pruning experiments

USAGE:
  ticketlab run     --config FILE [--out DIR] [--seeds 1,2,3] [--resume] [--stop-after K]
  ticketlab ablate  --config FILE --variant no-rewind|one-shot
                    [--out DIR] [--seeds ...] [--resume] [--stop-after K]
  ticketlab report  --out DIR --experiment NAME [NAME...]
  ticketlab verify  --out DIR --experiment NAME
  ticketlab inspect FILE

Exit status: 0 success, 1 run failure, 2 usage error.
";

struct Args {
    config: Option<PathBuf>,
    out: Option<String>,
    seeds: Option<Vec<u64>>,
    resume: bool,
    stop_after: Option<usize>,
    variant: Option<Variant>,
    experiments: Vec<String>,
    positional: Vec<String>,
}

fn parse_args(mut argv: std::env::Args) -> HarnessResult<(String, Args)> {
    let _ = argv.next();
    let command = argv
        .next()
        .ok_or_else(|| HarnessError::Usage("missing subcommand".into()))?;
    let mut args = Args {
        config: None,
        out: None,
        seeds: None,
        resume: false,
        stop_after: None,
        variant: None,
        experiments: Vec::new(),
        positional: Vec::new(),
    };
    let mut iter = argv.peekable();
    while let Some(flag) = iter.next() {
        let mut value = |name: &str| -> HarnessResult<String> {
            iter.next()
                .ok_or_else(|| HarnessError::Usage(format!("{name} needs a value")))
        };
        match flag.as_str() {
            "--config" => args.config = Some(PathBuf::from(value("--config")?)),
            "--out" => args.out = Some(value("--out")?),
            "--seeds" => {
                let list = value("--seeds")?;
                let seeds: Result<Vec<u64>, _> =
                    list.split(',').map(|s| s.trim().parse()).collect();
                args.seeds = Some(seeds.map_err(|_| {
                    HarnessError::Usage(format!("bad --seeds list `{list}`"))
                })?);
            }
            "--resume" => args.resume = true,
            "--stop-after" => {
                let v = value("--stop-after")?;
                args.stop_after = Some(v.parse().map_err(|_| {
                    HarnessError::Usage(format!("bad --stop-after `{v}`"))
                })?);
            }
            "--variant" => {
                let v = value("--variant")?;
                args.variant = Some(Variant::parse(&v).ok_or_else(|| {
                    HarnessError::Usage(format!(
                        "--variant must be no-rewind or one-shot, got `{v}`"
                    ))
                })?);
            }
            "--experiment" => args.experiments.push(value("--experiment")?),
            other if other.starts_with('-') => {
                return Err(HarnessError::Usage(format!("unknown flag `{other}`")));
            }
            other => args.positional.push(other.to_string()),
        }
    }
    Ok((command, args))
}

fn load_config(args: &Args) -> HarnessResult<ExperimentConfig> {
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| HarnessError::Usage("--config is required".into()))?;
    let cfg = ExperimentConfig::from_file(path)?;
    cfg.with_overrides(args.seeds.clone(), args.out.clone(), args.variant)
}

fn out_root(args: &Args, cfg: Option<&ExperimentConfig>) -> PathBuf {
    args.out
        .clone()
        .or_else(|| cfg.and_then(|c| c.output_dir.clone()))
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn print_summary(record: &RunRecord) {
    let direction = if record.metric_name == "log_perplexity" {
        "lower is better"
    } else {
        "higher is better"
    };
    println!(
        "experiment {} ({}, metric {} [{direction}], variant {})",
        record.experiment, record.task, record.metric_name, record.variant
    );
    if !record.baseline.is_empty() {
        let vals: Vec<String> = record
            .baseline
            .iter()
            .map(|(s, v)| format!("seed {s}: {v:.4}"))
            .collect();
        println!("  unpruned baseline: {}", vals.join(", "));
    }
    for row in &record.rows {
        let fmt = |vals: Vec<f64>| -> String {
            if vals.is_empty() {
                return "-".into();
            }
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            format!("{mean:.4}")
        };
        let winning: Vec<f64> = row.cells.iter().filter_map(|c| c.winning).collect();
        let random: Vec<f64> = row.cells.iter().filter_map(|c| c.random).collect();
        println!(
            "  k {:>2} pruned {:.4}: winning {} random {}",
            row.k,
            row.r_k,
            fmt(winning),
            fmt(random)
        );
    }
}

fn run(command: &str, args: Args) -> HarnessResult<()> {
    match command {
        "run" | "ablate" => {
            if command == "ablate" && args.variant.is_none() {
                return Err(HarnessError::Usage(
                    "ablate requires --variant no-rewind|one-shot".into(),
                ));
            }
            if command == "run" && args.variant.is_some() {
                return Err(HarnessError::Usage(
                    "--variant is only valid with ablate".into(),
                ));
            }
            let cfg = load_config(&args)?;
            let root = out_root(&args, Some(&cfg));
            let options = RunOptions {
                resume: args.resume,
                stop_after: args.stop_after,
            };
            let record = run_experiment(&cfg, &root, &options)?;
            print_summary(&record);
            let failed: Vec<String> = record
                .rows
                .iter()
                .flat_map(|r| r.cells.iter())
                .filter(|c| c.status != "ok")
                .map(|c| format!("seed {} ({})", c.seed, c.status))
                .collect();
            if !failed.is_empty() {
                return Err(HarnessError::Run(format!(
                    "some runs failed: {}",
                    failed.join("; ")
                )));
            }
            Ok(())
        }
        "report" => {
            if args.experiments.is_empty() {
                return Err(HarnessError::Usage(
                    "report needs at least one --experiment NAME".into(),
                ));
            }
            let root = out_root(&args, None);
            for name in &args.experiments {
                let dir = root.join(name);
                let record = RunRecord::read_from(&dir.join("record.txt"))?;
                let rows = emit_report(&[record])?;
                let csv = curves_csv(&rows);
                let path = dir.join("curves.csv");
                std::fs::write(&path, &csv)?;
                println!("wrote {} ({} rows)", path.display(), rows.len());
            }
            Ok(())
        }
        "verify" => {
            if args.experiments.is_empty() {
                return Err(HarnessError::Usage(
                    "verify needs --experiment NAME".into(),
                ));
            }
            let root = out_root(&args, None);
            let mut bad = false;
            for name in &args.experiments {
                let report = verify_experiment(&root.join(name))?;
                println!(
                    "{name}: {} checks, {} problems",
                    report.checks,
                    report.problems.len()
                );
                for p in &report.problems {
                    println!("  problem: {p}");
                    bad = true;
                }
            }
            if bad {
                return Err(HarnessError::Integrity(
                    "verification found problems".into(),
                ));
            }
            Ok(())
        }
        "inspect" => {
            let [path] = args.positional.as_slice() else {
                return Err(HarnessError::Usage("inspect needs exactly one FILE".into()));
            };
            print!("{}", inspect::inspect_file(Path::new(path))?);
            Ok(())
        }
        other => Err(HarnessError::Usage(format!("unknown subcommand `{other}`"))),
    }
}

fn main() -> ExitCode {
    let (command, args) = match parse_args(std::env::args()) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            eprint!("{USAGE}");
            return ExitCode::from(2);
        }
    };
    match run(&command, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ HarnessError::Usage(_)) => {
            eprintln!("error: {e}");
            eprint!("{USAGE}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
