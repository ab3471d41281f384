//! Uniform driver interface over the RL, language-model and seq2seq tasks:
//! build a registry, train a (possibly masked) model under the task's
//! evaluation budget, return the scalar ticket metric plus trace rows and
//! snapshots.

use std::sync::Arc;

use lt_models::{build_model, Model, ParamRegistry};
use lt_nlp::{eval_token_accuracy, train_lm, train_seq2seq, Corpus, TaskSplit};
use lt_pruning::{ModelSnapshot, PruneMask, RewindPolicy};
use lt_rl::train_agent;

use crate::config::TaskSelector;
use crate::error::{HarnessError, HarnessResult};

/// One trace row; the column set depends on the task family.
#[derive(Debug, Clone)]
pub enum TraceRows {
    /// (episode_index, raw_return, epoch)
    Episodes(Vec<(usize, f64, usize)>),
    /// (epoch, train_loss)
    Epochs(Vec<(usize, f64)>),
}

impl TraceRows {
    pub fn to_csv(&self) -> String {
        match self {
            TraceRows::Episodes(rows) => {
                let mut out = String::from("episode_index,raw_return,epoch\n");
                for (i, r, e) in rows {
                    out.push_str(&format!("{i},{r},{e}\n"));
                }
                out
            }
            TraceRows::Epochs(rows) => {
                let mut out = String::from("epoch,train_loss\n");
                for (e, l) in rows {
                    out.push_str(&format!("{e},{l}\n"));
                }
                out
            }
        }
    }
}

pub struct EvalRun {
    pub metric: f64,
    pub trace: TraceRows,
    pub rewind_snapshot: Option<ModelSnapshot>,
    pub trained: ModelSnapshot,
}

/// A fully-resolved task: immutable, shared across seed threads.
pub struct TaskRunner {
    selector: TaskSelector,
    corpus: Option<Arc<Corpus>>,
    synth_train: Option<Arc<TaskSplit>>,
    synth_test: Option<Arc<TaskSplit>>,
}

impl TaskRunner {
    pub fn prepare(selector: &TaskSelector) -> HarnessResult<Self> {
        let mut corpus = None;
        let mut synth_train = None;
        let mut synth_test = None;
        match selector {
            TaskSelector::Lm {
                corpus_path,
                vocab_cap,
                max_train_tokens,
                ..
            } => {
                let c = match corpus_path {
                    Some(dir) => Corpus::load_dir(
                        std::path::Path::new(dir),
                        *vocab_cap,
                        *max_train_tokens,
                    )?,
                    None => Corpus::bundled(*vocab_cap, *max_train_tokens)?,
                };
                corpus = Some(Arc::new(c));
            }
            TaskSelector::Seq2Seq { task, .. } => {
                synth_train = Some(Arc::new(task.train_split()));
                synth_test = Some(Arc::new(task.test_split()));
            }
            TaskSelector::Rl { .. } => {}
        }
        Ok(TaskRunner {
            selector: selector.clone(),
            corpus,
            synth_train,
            synth_test,
        })
    }

    pub fn selector(&self) -> &TaskSelector {
        &self.selector
    }

    /// Registry + forward logic for a seed. For the LM task the vocabulary
    /// size comes from the loaded corpus.
    pub fn build(&self, seed: u64) -> HarnessResult<(ParamRegistry, Model)> {
        let config = match &self.selector {
            TaskSelector::Rl { model, .. } => model.clone(),
            TaskSelector::Lm {
                model_embed,
                model_hidden,
                model_layers,
                model_dropout,
                ..
            } => lt_models::ModelConfig::LstmLm {
                vocab: self.corpus.as_ref().unwrap().vocab_size(),
                embed: *model_embed,
                hidden: *model_hidden,
                layers: *model_layers,
                dropout: *model_dropout,
            },
            TaskSelector::Seq2Seq { model, .. } => model.clone(),
        };
        Ok(build_model(&config, seed)?)
    }

    /// Train under the task's fixed evaluation budget and report the ticket
    /// metric. `stream_seed` drives every random stream of the run.
    pub fn evaluate(
        &self,
        model: &Model,
        registry: &mut ParamRegistry,
        mask: Option<&PruneMask>,
        rewind: Option<&RewindPolicy>,
        stream_seed: u64,
    ) -> HarnessResult<EvalRun> {
        match (&self.selector, model) {
            (
                TaskSelector::Rl {
                    env,
                    trainer,
                    protocol,
                    ..
                },
                _,
            ) => {
                let out = train_agent(
                    model, registry, *env, trainer, protocol, mask, rewind, stream_seed,
                )?;
                Ok(EvalRun {
                    metric: out.ticket_reward,
                    trace: TraceRows::Episodes(
                        out.episodes
                            .iter()
                            .map(|e| (e.index, e.raw_return, e.epoch))
                            .collect(),
                    ),
                    rewind_snapshot: out.rewind_snapshot,
                    trained: out.trained,
                })
            }
            (TaskSelector::Lm { bptt, optimizer, .. }, Model::LstmLm(lm)) => {
                let corpus = self.corpus.as_ref().unwrap();
                let out = train_lm(
                    lm, registry, corpus, bptt, optimizer, mask, rewind, stream_seed,
                )?;
                Ok(EvalRun {
                    metric: out.test.log_perplexity,
                    trace: TraceRows::Epochs(
                        out.epoch_losses.iter().copied().enumerate().collect(),
                    ),
                    rewind_snapshot: out.rewind_snapshot,
                    trained: out.trained,
                })
            }
            (
                TaskSelector::Seq2Seq {
                    batch_size,
                    epochs,
                    optimizer,
                    ..
                },
                Model::TinyTransformer(tf),
            ) => {
                let out = train_seq2seq(
                    tf,
                    registry,
                    self.synth_train.as_ref().unwrap(),
                    *batch_size,
                    *epochs,
                    optimizer,
                    mask,
                    rewind,
                )?;
                let accuracy =
                    eval_token_accuracy(tf, registry, self.synth_test.as_ref().unwrap())?;
                Ok(EvalRun {
                    metric: accuracy,
                    trace: TraceRows::Epochs(
                        out.epoch_losses.iter().copied().enumerate().collect(),
                    ),
                    rewind_snapshot: out.rewind_snapshot,
                    trained: out.trained,
                })
            }
            _ => Err(HarnessError::Run(
                "model family does not match the task".into(),
            )),
        }
    }
}
