use std::collections::HashMap;
use std::path::Path;

use crate::error::{NlpError, NlpResult};

/// Token id arrays for the three splits plus the vocabulary that produced
/// them. Ids are dense in 0..vocab_size with the unknown token first.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
    pub test: Vec<usize>,
    vocab: Vec<String>,
    token_to_id: HashMap<String, usize>,
    unk_id: usize,
}

pub const UNK_TOKEN: &str = "<unk>";

impl Corpus {
    /// Word-level corpus from raw split texts. The vocabulary is the most
    /// frequent `vocab_cap - 1` train-split words (ties broken
    /// lexicographically) plus the unknown token; rarer words map to it.
    /// `max_train_tokens` truncates the train stream after tokenization,
    /// which keeps quick configurations cheap.
    pub fn build(
        train_text: &str,
        valid_text: &str,
        test_text: &str,
        vocab_cap: usize,
        max_train_tokens: Option<usize>,
    ) -> NlpResult<Self> {
        if vocab_cap < 2 {
            return Err(NlpError::Contract(format!(
                "vocabulary cap {vocab_cap} leaves no room for words"
            )));
        }
        let train_words: Vec<&str> = train_text.split_whitespace().collect();
        let train_words = match max_train_tokens {
            Some(n) => &train_words[..train_words.len().min(n)],
            None => &train_words[..],
        };
        if train_words.is_empty() {
            return Err(NlpError::Contract("empty train split".into()));
        }

        let mut counts: HashMap<&str, usize> = HashMap::new();
        for w in train_words {
            *counts.entry(w).or_default() += 1;
        }
        let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
        ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked.truncate(vocab_cap - 1);

        let mut vocab = vec![UNK_TOKEN.to_string()];
        vocab.extend(ranked.iter().map(|(w, _)| w.to_string()));
        let token_to_id: HashMap<String, usize> = vocab
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();

        let encode = |words: &[&str]| -> Vec<usize> {
            words
                .iter()
                .map(|w| token_to_id.get(*w).copied().unwrap_or(0))
                .collect()
        };
        let valid_words: Vec<&str> = valid_text.split_whitespace().collect();
        let test_words: Vec<&str> = test_text.split_whitespace().collect();

        Ok(Corpus {
            train: encode(train_words),
            valid: encode(&valid_words),
            test: encode(&test_words),
            vocab,
            token_to_id,
            unk_id: 0,
        })
    }

    /// Load a three-file corpus directory (train.txt, valid.txt, test.txt).
    pub fn load_dir(
        dir: &Path,
        vocab_cap: usize,
        max_train_tokens: Option<usize>,
    ) -> NlpResult<Self> {
        let read = |name: &str| -> NlpResult<String> {
            std::fs::read_to_string(dir.join(name)).map_err(NlpError::Io)
        };
        Self::build(
            &read("train.txt")?,
            &read("valid.txt")?,
            &read("test.txt")?,
            vocab_cap,
            max_train_tokens,
        )
    }

    /// The corpus shipped with the crate.
    pub fn bundled(vocab_cap: usize, max_train_tokens: Option<usize>) -> NlpResult<Self> {
        Self::build(
            include_str!("../data/train.txt"),
            include_str!("../data/valid.txt"),
            include_str!("../data/test.txt"),
            vocab_cap,
            max_train_tokens,
        )
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn unk_id(&self) -> usize {
        self.unk_id
    }

    pub fn id_of(&self, token: &str) -> Option<usize> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: usize) -> &str {
        &self.vocab[id]
    }
}
