//! Language-model training with truncated backpropagation through time,
//! perplexity evaluation, and a synthetic sequence-transduction task for
//! the miniature transformer. Both trainers run under the masked-training
//! contract.

pub mod batch;
pub mod corpus;
pub mod error;
pub mod lm;
pub mod seq2seq;
pub mod synth;

pub use batch::{batchify, StreamMatrix};
pub use corpus::Corpus;
pub use error::{NlpError, NlpResult};
pub use lm::{eval_perplexity, train_lm, train_lm_epoch, BpttConfig, LmTrainOutcome, PerplexityReport};
pub use seq2seq::{eval_token_accuracy, train_seq2seq, Seq2SeqOutcome};
pub use synth::{SyntheticTask, TaskKind, TaskSplit};
