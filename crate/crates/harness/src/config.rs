//! Flat dotted-key experiment configs.
//!
//! Format: one `key = value` per line, `#` starts a comment, lists are
//! comma-separated. Every key is validated against the schema for the
//! selected task; unknown keys are usage errors so typos never silently
//! fall back to defaults. The canonical serialization (sorted keys) feeds
//! the config hash.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use lt_models::ModelConfig;
use lt_nlp::{BpttConfig, SyntheticTask, TaskKind};
use lt_pruning::{PruneSchedule, PruneScope, RewindPolicy, RewindUnit};
use lt_rl::{EnvKind, EpochUnit, EvalProtocol, RewardTransform, TrainerConfig};
use lt_tensor::OptimizerConfig;

use crate::error::{HarnessError, HarnessResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneMode {
    Iterative,
    OneShot,
}

impl PruneMode {
    pub fn name(&self) -> &'static str {
        match self {
            PruneMode::Iterative => "iterative",
            PruneMode::OneShot => "one-shot",
        }
    }
}

/// Experiment variant label carried through records and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Iterative,
    NoRewind,
    OneShot,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Iterative => "iterative",
            Variant::NoRewind => "no-rewind",
            Variant::OneShot => "one-shot",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "iterative" => Some(Variant::Iterative),
            "no-rewind" => Some(Variant::NoRewind),
            "one-shot" => Some(Variant::OneShot),
            _ => None,
        }
    }
}

/// What the experiment trains and how tickets are evaluated.
#[derive(Debug, Clone)]
pub enum TaskSelector {
    Rl {
        env: EnvKind,
        model: ModelConfig,
        trainer: TrainerConfig,
        protocol: EvalProtocol,
    },
    Lm {
        corpus_path: Option<String>,
        vocab_cap: usize,
        max_train_tokens: Option<usize>,
        model_embed: usize,
        model_hidden: usize,
        model_layers: usize,
        model_dropout: f64,
        bptt: BpttConfig,
        optimizer: OptimizerConfig,
    },
    Seq2Seq {
        task: SyntheticTask,
        model: ModelConfig,
        batch_size: usize,
        epochs: usize,
        optimizer: OptimizerConfig,
    },
}

impl TaskSelector {
    pub fn name(&self) -> &'static str {
        match self {
            TaskSelector::Rl { env, .. } => env.name(),
            TaskSelector::Lm { .. } => "lm",
            TaskSelector::Seq2Seq { .. } => "seq2seq",
        }
    }

    pub fn metric_name(&self) -> &'static str {
        match self {
            TaskSelector::Rl { .. } => "ticket_reward",
            TaskSelector::Lm { .. } => "log_perplexity",
            TaskSelector::Seq2Seq { .. } => "token_accuracy",
        }
    }

    /// Lower metric is better for perplexity; higher for the others.
    pub fn lower_is_better(&self) -> bool {
        matches!(self, TaskSelector::Lm { .. })
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub task: TaskSelector,
    pub seeds: Vec<u64>,
    pub schedule: PruneSchedule,
    pub mode: PruneMode,
    pub scope: PruneScope,
    pub rewind: RewindPolicy,
    pub output_dir: Option<String>,
    canonical: String,
}

impl ExperimentConfig {
    pub fn canonical_text(&self) -> &str {
        &self.canonical
    }

    pub fn hash(&self) -> String {
        let mut h: u64 = 0xcbf29ce484222325;
        for byte in self.canonical.as_bytes() {
            h ^= *byte as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }

    pub fn from_file(path: &Path) -> HarnessResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            HarnessError::Usage(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> HarnessResult<Self> {
        let kv = parse_lines(text)?;
        build_config(kv)
    }

    /// Apply CLI overrides (seed list, output dir) producing a new config
    /// whose canonical text reflects the overrides.
    pub fn with_overrides(
        &self,
        seeds: Option<Vec<u64>>,
        output_dir: Option<String>,
        variant: Option<Variant>,
    ) -> HarnessResult<Self> {
        let mut kv: BTreeMap<String, String> = parse_lines(&self.canonical)?;
        if let Some(seeds) = seeds {
            let joined = seeds
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(",");
            kv.insert("seeds".into(), joined);
        }
        if let Some(dir) = output_dir {
            kv.insert("output.dir".into(), dir);
        }
        match variant {
            Some(Variant::NoRewind) => {
                kv.insert("rewind.point".into(), "0".into());
                let name = kv.get("experiment.name").cloned().unwrap_or_default();
                kv.insert("experiment.name".into(), format!("{name}-no-rewind"));
            }
            Some(Variant::OneShot) => {
                kv.insert("prune.mode".into(), "one-shot".into());
                let name = kv.get("experiment.name").cloned().unwrap_or_default();
                kv.insert("experiment.name".into(), format!("{name}-one-shot"));
            }
            _ => {}
        }
        build_config(kv)
    }

    pub fn variant(&self) -> Variant {
        if self.mode == PruneMode::OneShot {
            Variant::OneShot
        } else if self.rewind.is_initialization() {
            Variant::NoRewind
        } else {
            Variant::Iterative
        }
    }
}

fn parse_lines(text: &str) -> HarnessResult<BTreeMap<String, String>> {
    let mut kv = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(HarnessError::Usage(format!(
                "line {}: expected `key = value`, got `{raw}`",
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(HarnessError::Usage(format!(
                "line {}: empty key or value",
                lineno + 1
            )));
        }
        if kv.insert(key.clone(), value).is_some() {
            return Err(HarnessError::Usage(format!("duplicate key `{key}`")));
        }
    }
    Ok(kv)
}

struct Reader {
    kv: BTreeMap<String, String>,
    used: HashSet<String>,
}

impl Reader {
    fn get(&mut self, key: &str) -> Option<String> {
        let v = self.kv.get(key).cloned();
        if v.is_some() {
            self.used.insert(key.to_string());
        }
        v
    }

    fn require(&mut self, key: &str) -> HarnessResult<String> {
        self.get(key)
            .ok_or_else(|| HarnessError::Usage(format!("missing required key `{key}`")))
    }

    fn f64_or(&mut self, key: &str, default: f64) -> HarnessResult<f64> {
        match self.get(key) {
            Some(v) => v
                .parse()
                .map_err(|_| HarnessError::Usage(format!("`{key}` is not a number: {v}"))),
            None => Ok(default),
        }
    }

    fn usize_or(&mut self, key: &str, default: usize) -> HarnessResult<usize> {
        match self.get(key) {
            Some(v) => v
                .parse()
                .map_err(|_| HarnessError::Usage(format!("`{key}` is not an integer: {v}"))),
            None => Ok(default),
        }
    }

    fn usize_opt(&mut self, key: &str) -> HarnessResult<Option<usize>> {
        match self.get(key) {
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| HarnessError::Usage(format!("`{key}` is not an integer: {v}"))),
            None => Ok(None),
        }
    }

    fn f64_opt(&mut self, key: &str) -> HarnessResult<Option<f64>> {
        match self.get(key) {
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| HarnessError::Usage(format!("`{key}` is not a number: {v}"))),
            None => Ok(None),
        }
    }

    fn bool_or(&mut self, key: &str, default: bool) -> HarnessResult<bool> {
        match self.get(key).as_deref() {
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(v) => Err(HarnessError::Usage(format!(
                "`{key}` must be true or false, got {v}"
            ))),
            None => Ok(default),
        }
    }

    fn usize_list_or(&mut self, key: &str, default: &[usize]) -> HarnessResult<Vec<usize>> {
        match self.get(key) {
            Some(v) => v
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse()
                        .map_err(|_| HarnessError::Usage(format!("`{key}` has a bad entry: {p}")))
                })
                .collect(),
            None => Ok(default.to_vec()),
        }
    }
}

fn build_config(kv: BTreeMap<String, String>) -> HarnessResult<ExperimentConfig> {
    let canonical: String = kv
        .iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect();
    let mut r = Reader {
        kv,
        used: HashSet::new(),
    };

    let name = r.require("experiment.name")?;
    if name.contains(['/', '\\']) || name.is_empty() {
        return Err(HarnessError::Usage(format!(
            "experiment.name `{name}` must be a plain directory name"
        )));
    }
    let task_name = r.require("task.name")?;

    let seeds: Vec<u64> = r
        .require("seeds")?
        .split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| HarnessError::Usage(format!("bad seed `{p}`")))
        })
        .collect::<HarnessResult<_>>()?;
    if seeds.is_empty() {
        return Err(HarnessError::Usage("seed list is empty".into()));
    }

    let schedule = PruneSchedule::new(
        r.f64_or("prune.rate", 0.2)?,
        r.usize_or("prune.iterations", 20)?,
    )
    .map_err(|e| HarnessError::Usage(e.to_string()))?;
    let mode = match r.get("prune.mode").as_deref().unwrap_or("iterative") {
        "iterative" => PruneMode::Iterative,
        "one-shot" => PruneMode::OneShot,
        v => {
            return Err(HarnessError::Usage(format!(
                "prune.mode must be iterative or one-shot, got {v}"
            )))
        }
    };
    let scope = match r.get("prune.scope").as_deref().unwrap_or("all") {
        "all" => PruneScope::All,
        "exclude-embedding" => PruneScope::ExcludeEmbedding,
        v => {
            return Err(HarnessError::Usage(format!(
                "prune.scope must be all or exclude-embedding, got {v}"
            )))
        }
    };
    let rewind = RewindPolicy {
        point: r.usize_or("rewind.point", 1)?,
        unit: match r.get("rewind.unit").as_deref().unwrap_or("epochs") {
            "epochs" => RewindUnit::Epochs,
            "updates" => RewindUnit::Updates,
            v => {
                return Err(HarnessError::Usage(format!(
                    "rewind.unit must be epochs or updates, got {v}"
                )))
            }
        },
    };
    let output_dir = r.get("output.dir");

    let optimizer = |r: &mut Reader, default_kind: &str, default_lr: f64| -> HarnessResult<OptimizerConfig> {
        let kind = r.get("optimizer.kind").unwrap_or_else(|| default_kind.into());
        let lr = r.f64_or("optimizer.lr", default_lr)?;
        let cfg = match kind.as_str() {
            "adam" => OptimizerConfig::Adam {
                learning_rate: lr,
                beta1: r.f64_or("optimizer.beta1", 0.9)?,
                beta2: r.f64_or("optimizer.beta2", 0.999)?,
                epsilon: r.f64_or("optimizer.epsilon", 1e-3)?,
            },
            "rmsprop" => OptimizerConfig::RmsProp {
                learning_rate: lr,
                alpha: r.f64_or("optimizer.alpha", 0.99)?,
                epsilon: r.f64_or("optimizer.epsilon", 1e-8)?,
            },
            v => {
                return Err(HarnessError::Usage(format!(
                    "optimizer.kind must be adam or rmsprop, got {v}"
                )))
            }
        };
        cfg.validate()
            .map_err(|e| HarnessError::Usage(e.to_string()))?;
        Ok(cfg)
    };

    let task = match task_name.as_str() {
        "cartpole" | "acrobot" | "catcher" => {
            let env = EnvKind::parse(&task_name).unwrap();
            let pixel = env == EnvKind::Catcher;
            let defaults = if pixel {
                TrainerConfig::pixel_control()
            } else {
                TrainerConfig::classic_control()
            };
            let (default_kind, default_lr) = if pixel { ("adam", 1e-3) } else { ("rmsprop", 1e-4) };
            let trainer = TrainerConfig {
                workers: r.usize_or("trainer.workers", defaults.workers)?,
                n_steps: r.usize_or("trainer.n_steps", defaults.n_steps)?,
                gamma: r.f64_or("trainer.gamma", defaults.gamma)?,
                entropy_weight: r.f64_or("trainer.entropy_weight", defaults.entropy_weight)?,
                value_weight: r.f64_or("trainer.value_weight", defaults.value_weight)?,
                reward_transform: match r.get("trainer.reward_transform") {
                    Some(v) => RewardTransform::parse(&v).ok_or_else(|| {
                        HarnessError::Usage(format!("bad trainer.reward_transform `{v}`"))
                    })?,
                    None => defaults.reward_transform,
                },
                advantage_clip: r.bool_or("trainer.advantage_clip", defaults.advantage_clip)?,
                importance_clamp: match r.f64_opt("trainer.importance_clamp")? {
                    Some(v) if v == 0.0 => None,
                    Some(v) => Some(v),
                    None => defaults.importance_clamp,
                },
                update_lag: r.bool_or("trainer.update_lag", defaults.update_lag)?,
                optimizer: optimizer(&mut r, default_kind, default_lr)?,
            };
            trainer
                .validate()
                .map_err(|e| HarnessError::Usage(e.to_string()))?;

            let default_protocol = match env {
                EnvKind::CartPole => EvalProtocol::cartpole(),
                EnvKind::Acrobot => EvalProtocol::acrobot(),
                EnvKind::Catcher => EvalProtocol::catcher(),
            };
            let protocol = EvalProtocol {
                epochs: r.usize_or("eval.epochs", default_protocol.epochs)?,
                per_epoch: r.usize_or("eval.per_epoch", default_protocol.per_epoch)?,
                unit: match r.get("eval.unit") {
                    Some(v) => EpochUnit::parse(&v)
                        .ok_or_else(|| HarnessError::Usage(format!("bad eval.unit `{v}`")))?,
                    None => default_protocol.unit,
                },
                window: r.usize_or("eval.window", default_protocol.window)?,
            };
            protocol
                .validate()
                .map_err(|e| HarnessError::Usage(e.to_string()))?;

            let model = match env {
                EnvKind::CartPole => ModelConfig::MlpActorCritic {
                    obs_dim: 4,
                    actions: 2,
                    hidden: r.usize_list_or("model.hidden", &[128, 128, 128])?,
                },
                EnvKind::Acrobot => ModelConfig::MlpActorCritic {
                    obs_dim: 6,
                    actions: 3,
                    hidden: r.usize_list_or("model.hidden", &[256, 256, 256])?,
                },
                EnvKind::Catcher => ModelConfig::ConvActorCritic {
                    in_channels: 1,
                    obs_size: 24,
                    actions: 3,
                    conv_channels: r.usize_or("model.conv_channels", 16)?,
                    fc: r.usize_list_or("model.fc", &[64, 64])?,
                },
            };
            model
                .validate()
                .map_err(|e| HarnessError::Usage(e.to_string()))?;
            TaskSelector::Rl {
                env,
                model,
                trainer,
                protocol,
            }
        }
        "lm" => {
            let bptt = BpttConfig {
                seq_len: r.usize_or("bptt.seq_len", 50)?,
                batch_size: r.usize_or("bptt.batch_size", 30)?,
                epochs: r.usize_or("bptt.epochs", 10)?,
                grad_clip: r.f64_opt("bptt.grad_clip")?,
            };
            bptt.validate()
                .map_err(|e| HarnessError::Usage(e.to_string()))?;
            TaskSelector::Lm {
                corpus_path: r.get("corpus.path"),
                vocab_cap: r.usize_or("corpus.vocab_cap", 5000)?,
                max_train_tokens: r.usize_opt("corpus.max_train_tokens")?,
                model_embed: r.usize_or("model.embed", 256)?,
                model_hidden: r.usize_or("model.hidden_size", 256)?,
                model_layers: r.usize_or("model.layers", 2)?,
                model_dropout: r.f64_or("model.dropout", 0.5)?,
                bptt,
                optimizer: optimizer(&mut r, "adam", 1e-3)?,
            }
        }
        "seq2seq" => {
            let kind_name = r.get("synth.kind").unwrap_or_else(|| "reverse".into());
            let kind = TaskKind::parse(&kind_name)
                .ok_or_else(|| HarnessError::Usage(format!("bad synth.kind `{kind_name}`")))?;
            let task = SyntheticTask {
                kind,
                vocab: r.usize_or("synth.vocab", 24)?,
                min_len: r.usize_or("synth.min_len", 4)?,
                max_len: r.usize_or("synth.max_len", 10)?,
                train_count: r.usize_or("synth.train", 2048)?,
                test_count: r.usize_or("synth.test", 128)?,
                seed: r.usize_or("synth.seed", 7)? as u64,
            };
            task.validate()
                .map_err(|e| HarnessError::Usage(e.to_string()))?;
            let model = ModelConfig::TinyTransformer {
                vocab: task.vocab,
                model_dim: r.usize_or("model.dim", 64)?,
                heads: r.usize_or("model.heads", 4)?,
                enc_layers: r.usize_or("model.enc_layers", 2)?,
                dec_layers: r.usize_or("model.dec_layers", 2)?,
                ff_dim: r.usize_or("model.ff", 128)?,
                max_len: r.usize_or("model.max_len", 16)?,
            };
            model
                .validate()
                .map_err(|e| HarnessError::Usage(e.to_string()))?;
            TaskSelector::Seq2Seq {
                task,
                model,
                batch_size: r.usize_or("seq2seq.batch_size", 32)?,
                epochs: r.usize_or("seq2seq.epochs", 20)?,
                optimizer: optimizer(&mut r, "adam", 1e-3)?,
            }
        }
        v => {
            return Err(HarnessError::Usage(format!(
                "task.name `{v}` is not one of cartpole, acrobot, catcher, lm, seq2seq"
            )))
        }
    };

    // Unknown keys are usage errors.
    let unknown: Vec<String> = r
        .kv
        .keys()
        .filter(|k| !r.used.contains(*k))
        .cloned()
        .collect();
    if !unknown.is_empty() {
        return Err(HarnessError::Usage(format!(
            "unknown config keys: {}",
            unknown.join(", ")
        )));
    }

    Ok(ExperimentConfig {
        name,
        task,
        seeds,
        schedule,
        mode,
        scope,
        rewind,
        output_dir,
        canonical,
    })
}
