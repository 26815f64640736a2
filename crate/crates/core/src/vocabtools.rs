//! Cross-vocabulary operations: overlap, corpus-driven pruning and the
//! embedding remap plan used when swapping one tokenizer for another.

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value};
use thiserror::Error;

use crate::conllu::Corpus;
use crate::json::fixed;
use crate::metrics::{partitioned_pass, MetricsError};
use crate::wordpiece::{matched_ids, TokenizerConfig, VocabError, Vocabulary};

#[derive(Debug, Error)]
pub enum VocabToolsError {
    #[error("pruning corpus contains no words")]
    EmptyCorpus,
    #[error("special token {token:?} is missing from the {which} vocabulary")]
    MissingSpecial { token: String, which: &'static str },
    #[error("unknown remap mode {0:?} (expected paper or shared-copy)")]
    UnknownMode(String),
    #[error(transparent)]
    Vocab(#[from] VocabError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// How much of `a` is covered by `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapResult {
    pub size_a: usize,
    pub size_b: usize,
    pub shared: usize,
    pub proportion_a_in_b: f64,
}

impl OverlapResult {
    pub fn to_json(&self) -> Value {
        json!({
            "size_a": self.size_a,
            "size_b": self.size_b,
            "shared": self.shared,
            "proportion_a_in_b": fixed(self.proportion_a_in_b),
        })
    }
}

/// Exact string intersection, reported relative to `a`.
pub fn overlap(a: &Vocabulary, b: &Vocabulary) -> OverlapResult {
    let shared = a.tokens().iter().filter(|t| b.contains(t)).count();
    OverlapResult {
        size_a: a.len(),
        size_b: b.len(),
        shared,
        proportion_a_in_b: shared as f64 / a.len() as f64,
    }
}

/// Marks which ids of `vocab` the greedy search selects anywhere in
/// `corpus`. Besides emitted pieces this includes pieces matched before a
/// dead end: dropping one of those would let a shorter match through and
/// turn an UNK word into a segmented one.
pub fn used_tokens(
    vocab: &Vocabulary,
    corpus: &Corpus,
    config: &TokenizerConfig,
    workers: usize,
) -> Result<Vec<bool>, MetricsError> {
    partitioned_pass(
        &corpus.sentences,
        workers,
        || vec![false; vocab.len()],
        |seen, sentence| {
            for word in &sentence.words {
                for id in matched_ids(&word.form, vocab, config) {
                    seen[id as usize] = true;
                }
            }
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x |= y;
            }
            a
        },
    )
}

/// Keeps the special tokens plus every token used while tokenizing `corpus`
/// (see [`used_tokens`]), in original order. Ids are re-compacted.
pub fn prune_vocab(
    vocab: &Vocabulary,
    corpus: &Corpus,
    config: &TokenizerConfig,
) -> Result<Vocabulary, VocabToolsError> {
    prune_vocab_with_workers(vocab, corpus, config, 1)
}

pub fn prune_vocab_with_workers(
    vocab: &Vocabulary,
    corpus: &Corpus,
    config: &TokenizerConfig,
    workers: usize,
) -> Result<Vocabulary, VocabToolsError> {
    if corpus.is_empty() {
        return Err(VocabToolsError::EmptyCorpus);
    }
    let seen = used_tokens(vocab, corpus, config, workers)?;
    let kept = vocab
        .tokens()
        .iter()
        .zip(seen)
        .filter(|(token, used)| *used || vocab.is_special(token))
        .map(|(token, _)| token.clone());
    Ok(Vocabulary::from_tokens(kept, vocab.options().clone())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemapMode {
    /// Only special-token embeddings are carried over.
    Paper,
    /// Special tokens plus every string present in both vocabularies.
    SharedCopy,
}

impl FromStr for RemapMode {
    type Err = VocabToolsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(RemapMode::Paper),
            "shared-copy" => Ok(RemapMode::SharedCopy),
            other => Err(VocabToolsError::UnknownMode(other.to_owned())),
        }
    }
}

impl fmt::Display for RemapMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RemapMode::Paper => "paper",
            RemapMode::SharedCopy => "shared-copy",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemapAction {
    CopyFrom(u32),
    RandomInit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemapEntry {
    pub new_id: u32,
    pub token: String,
    pub action: RemapAction,
}

/// One initialization instruction per id of the new vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemapPlan {
    pub mode: RemapMode,
    pub entries: Vec<RemapEntry>,
}

impl RemapPlan {
    pub fn copy_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| matches!(e.action, RemapAction::CopyFrom(_)))
            .count()
    }

    pub fn random_count(&self) -> usize {
        self.entries.len() - self.copy_count()
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|e| match e.action {
                RemapAction::CopyFrom(old) => json!({
                    "new_id": e.new_id,
                    "token": e.token,
                    "action": "copy",
                    "old_id": old,
                }),
                RemapAction::RandomInit => json!({
                    "new_id": e.new_id,
                    "token": e.token,
                    "action": "random_init",
                }),
            })
            .collect();
        json!({
            "mode": self.mode.to_string(),
            "copy_count": self.copy_count(),
            "random_init_count": self.random_count(),
            "entries": entries,
        })
    }
}

/// Plans how to initialize embeddings for `new_vocab` from a model trained
/// with `old_vocab`. The special tokens of `new_vocab` must exist in both.
pub fn remap_plan(
    old_vocab: &Vocabulary,
    new_vocab: &Vocabulary,
    mode: RemapMode,
) -> Result<RemapPlan, VocabToolsError> {
    for token in &new_vocab.options().special_tokens {
        for (vocab, which) in [(new_vocab, "new"), (old_vocab, "old")] {
            if !vocab.contains(token) {
                return Err(VocabToolsError::MissingSpecial {
                    token: token.clone(),
                    which,
                });
            }
        }
    }
    let entries = new_vocab
        .tokens()
        .iter()
        .enumerate()
        .map(|(new_id, token)| {
            let copy = new_vocab.is_special(token) || mode == RemapMode::SharedCopy;
            let action = match old_vocab.id(token) {
                Some(old_id) if copy => RemapAction::CopyFrom(old_id),
                _ => RemapAction::RandomInit,
            };
            RemapEntry {
                new_id: new_id as u32,
                token: token.clone(),
                action,
            }
        })
        .collect();
    Ok(RemapPlan { mode, entries })
}
