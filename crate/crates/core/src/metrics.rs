//! Corpus-level tokenizer statistics.
//!
//! Every statistic is derived from [`MetricCounts`], a bag of exact integer
//! counts. Workers each count a contiguous slice of sentences, partial
//! counts are merged by addition, and ratios are computed once at the end,
//! so the result does not depend on how the corpus was partitioned.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::conllu::{Corpus, Sentence};
use crate::json::fixed;
use crate::wordpiece::{tokenize_word, TokenizedWord, TokenizerConfig, Vocabulary};

pub const DEFAULT_BIN_WIDTH: usize = 5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("corpus contains no words; metric is undefined")]
    EmptyCorpus,
    #[error("bin width must be at least 1")]
    InvalidBinWidth,
    #[error("worker count must be at least 1")]
    InvalidWorkers,
}

/// Runs `fold` over every sentence of `sentences`, split into `workers`
/// contiguous partitions, and merges the partial states in partition order.
///
/// Callers must supply a commutative, associative `merge` for the result to
/// be independent of `workers`.
pub fn partitioned_pass<S, I, F, M>(
    sentences: &[Sentence],
    workers: usize,
    init: I,
    fold: F,
    merge: M,
) -> Result<S, MetricsError>
where
    S: Send,
    I: Fn() -> S + Sync,
    F: Fn(&mut S, &Sentence) + Sync,
    M: Fn(S, S) -> S + Sync,
{
    if workers == 0 {
        return Err(MetricsError::InvalidWorkers);
    }
    let run = |chunk: &[Sentence]| {
        let mut state = init();
        for sentence in chunk {
            fold(&mut state, sentence);
        }
        state
    };
    if workers == 1 || sentences.len() < 2 {
        return Ok(run(sentences));
    }
    let chunk_len = sentences.len().div_ceil(workers);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|_| MetricsError::InvalidWorkers)?;
    let partials: Vec<S> = pool.install(|| sentences.par_chunks(chunk_len).map(run).collect());
    Ok(partials.into_iter().reduce(&merge).unwrap_or_else(init))
}

/// Exact integer tallies behind every tokenizer statistic.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MetricCounts {
    pub word_count: u64,
    pub subword_count: u64,
    pub continued_words: u64,
    pub unk_pieces: u64,
    pub unk_words: u64,
    pub sentence_count: u64,
    /// Per-sentence piece totals: length -> number of sentences.
    pub model_lengths: BTreeMap<u64, u64>,
    /// Per-sentence reference word counts: length -> number of sentences.
    pub reference_lengths: BTreeMap<u64, u64>,
}

impl MetricCounts {
    pub fn add_word(&mut self, word: &TokenizedWord, unk_id: u32) -> u64 {
        let pieces = word.piece_count() as u64;
        self.word_count += 1;
        self.subword_count += pieces;
        if pieces >= 2 {
            self.continued_words += 1;
        }
        if word.is_unknown {
            self.unk_words += 1;
        }
        self.unk_pieces += word.pieces.iter().filter(|&&p| p == unk_id).count() as u64;
        pieces
    }

    pub fn add_sentence(
        &mut self,
        sentence: &Sentence,
        vocab: &Vocabulary,
        config: &TokenizerConfig,
    ) {
        let mut sentence_pieces = 0;
        for word in &sentence.words {
            let tokenized = tokenize_word(word, vocab, config);
            sentence_pieces += self.add_word(&tokenized, vocab.unk_id());
        }
        self.sentence_count += 1;
        *self.model_lengths.entry(sentence_pieces).or_default() += 1;
        *self
            .reference_lengths
            .entry(sentence.words.len() as u64)
            .or_default() += 1;
    }

    pub fn from_sentences(
        sentences: &[Sentence],
        vocab: &Vocabulary,
        config: &TokenizerConfig,
    ) -> Self {
        let mut counts = MetricCounts::default();
        for sentence in sentences {
            counts.add_sentence(sentence, vocab, config);
        }
        counts
    }

    pub fn merge(mut self, other: MetricCounts) -> MetricCounts {
        self.word_count += other.word_count;
        self.subword_count += other.subword_count;
        self.continued_words += other.continued_words;
        self.unk_pieces += other.unk_pieces;
        self.unk_words += other.unk_words;
        self.sentence_count += other.sentence_count;
        for (len, n) in other.model_lengths {
            *self.model_lengths.entry(len).or_default() += n;
        }
        for (len, n) in other.reference_lengths {
            *self.reference_lengths.entry(len).or_default() += n;
        }
        self
    }

    fn nonempty(&self) -> Result<(), MetricsError> {
        if self.word_count == 0 {
            Err(MetricsError::EmptyCorpus)
        } else {
            Ok(())
        }
    }

    pub fn fertility(&self) -> Result<f64, MetricsError> {
        self.nonempty()?;
        Ok(self.subword_count as f64 / self.word_count as f64)
    }

    pub fn continuation_proportion(&self) -> Result<f64, MetricsError> {
        self.nonempty()?;
        Ok(self.continued_words as f64 / self.word_count as f64)
    }

    /// (token level, word level).
    pub fn unk_proportions(&self) -> Result<(f64, f64), MetricsError> {
        self.nonempty()?;
        Ok((
            self.unk_pieces as f64 / self.subword_count as f64,
            self.unk_words as f64 / self.word_count as f64,
        ))
    }
}

/// Counts the whole corpus using `workers` partitions.
pub fn count_corpus(
    corpus: &Corpus,
    vocab: &Vocabulary,
    config: &TokenizerConfig,
    workers: usize,
) -> Result<MetricCounts, MetricsError> {
    partitioned_pass(
        &corpus.sentences,
        workers,
        MetricCounts::default,
        |counts, sentence| counts.add_sentence(sentence, vocab, config),
        MetricCounts::merge,
    )
}

/// Sentence lengths bucketed into half-open bins `[b*w, (b+1)*w)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub bin_width: u64,
    pub bins: BTreeMap<u64, u64>,
}

impl Histogram {
    pub fn from_lengths(
        lengths: &BTreeMap<u64, u64>,
        bin_width: usize,
    ) -> Result<Self, MetricsError> {
        if bin_width == 0 {
            return Err(MetricsError::InvalidBinWidth);
        }
        let bin_width = bin_width as u64;
        let mut bins = BTreeMap::new();
        for (&len, &n) in lengths {
            *bins.entry(len / bin_width).or_default() += n;
        }
        Ok(Histogram { bin_width, bins })
    }

    pub fn total(&self) -> u64 {
        self.bins.values().sum()
    }

    pub fn get(&self, bin: u64) -> u64 {
        self.bins.get(&bin).copied().unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        let bins: Vec<Value> = self
            .bins
            .iter()
            .map(|(&bin, &count)| {
                json!({
                    "bin": bin,
                    "count": count,
                    "lower": bin * self.bin_width,
                    "upper": (bin + 1) * self.bin_width,
                })
            })
            .collect();
        json!({ "bin_width": self.bin_width, "bins": bins })
    }
}

/// Every tokenizer statistic for one (corpus, vocabulary, config) triple.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenizerReport {
    pub fertility: f64,
    pub continuation_proportion: f64,
    pub unk_token_proportion: f64,
    pub unk_word_proportion: f64,
    pub word_count: u64,
    pub subword_count: u64,
    pub continued_word_count: u64,
    pub unk_piece_count: u64,
    pub unk_word_count: u64,
    pub sentence_count: u64,
    pub sentence_length_histogram: Histogram,
    pub reference_length_histogram: Histogram,
    pub vocab_name: String,
    pub language_tag: String,
}

impl TokenizerReport {
    pub fn from_counts(
        counts: &MetricCounts,
        bin_width: usize,
        vocab_name: &str,
        language_tag: &str,
    ) -> Result<Self, MetricsError> {
        let (unk_token_proportion, unk_word_proportion) = counts.unk_proportions()?;
        Ok(TokenizerReport {
            fertility: counts.fertility()?,
            continuation_proportion: counts.continuation_proportion()?,
            unk_token_proportion,
            unk_word_proportion,
            word_count: counts.word_count,
            subword_count: counts.subword_count,
            continued_word_count: counts.continued_words,
            unk_piece_count: counts.unk_pieces,
            unk_word_count: counts.unk_words,
            sentence_count: counts.sentence_count,
            sentence_length_histogram: Histogram::from_lengths(&counts.model_lengths, bin_width)?,
            reference_length_histogram: Histogram::from_lengths(
                &counts.reference_lengths,
                bin_width,
            )?,
            vocab_name: vocab_name.to_owned(),
            language_tag: language_tag.to_owned(),
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "fertility": fixed(self.fertility),
            "continuation_proportion": fixed(self.continuation_proportion),
            "unk_token_proportion": fixed(self.unk_token_proportion),
            "unk_word_proportion": fixed(self.unk_word_proportion),
            "word_count": self.word_count,
            "subword_count": self.subword_count,
            "continued_word_count": self.continued_word_count,
            "unk_piece_count": self.unk_piece_count,
            "unk_word_count": self.unk_word_count,
            "sentence_count": self.sentence_count,
            "sentence_length_histogram": self.sentence_length_histogram.to_json(),
            "reference_length_histogram": self.reference_length_histogram.to_json(),
            "vocab_name": self.vocab_name,
            "language_tag": self.language_tag,
        })
    }
}

fn single_pass(corpus: &Corpus, vocab: &Vocabulary, config: &TokenizerConfig) -> MetricCounts {
    MetricCounts::from_sentences(&corpus.sentences, vocab, config)
}

/// Mean number of pieces per reference word.
pub fn fertility(
    corpus: &Corpus,
    vocab: &Vocabulary,
    config: &TokenizerConfig,
) -> Result<f64, MetricsError> {
    single_pass(corpus, vocab, config).fertility()
}

/// Fraction of reference words split into two or more pieces.
pub fn continuation_proportion(
    corpus: &Corpus,
    vocab: &Vocabulary,
    config: &TokenizerConfig,
) -> Result<f64, MetricsError> {
    single_pass(corpus, vocab, config).continuation_proportion()
}

/// UNK share of emitted pieces and of reference words, in that order.
pub fn unk_proportions(
    corpus: &Corpus,
    vocab: &Vocabulary,
    config: &TokenizerConfig,
) -> Result<(f64, f64), MetricsError> {
    single_pass(corpus, vocab, config).unk_proportions()
}

/// Per-sentence length distributions: model pieces and reference words.
pub fn sentence_length_histogram(
    corpus: &Corpus,
    vocab: &Vocabulary,
    config: &TokenizerConfig,
    bin_width: usize,
) -> Result<(Histogram, Histogram), MetricsError> {
    if bin_width == 0 {
        return Err(MetricsError::InvalidBinWidth);
    }
    let counts = single_pass(corpus, vocab, config);
    Ok((
        Histogram::from_lengths(&counts.model_lengths, bin_width)?,
        Histogram::from_lengths(&counts.reference_lengths, bin_width)?,
    ))
}

pub fn tokenizer_report(
    corpus: &Corpus,
    vocab: &Vocabulary,
    config: &TokenizerConfig,
    bin_width: usize,
) -> Result<TokenizerReport, MetricsError> {
    tokenizer_report_with_workers(corpus, vocab, config, bin_width, 1)
}

pub fn tokenizer_report_with_workers(
    corpus: &Corpus,
    vocab: &Vocabulary,
    config: &TokenizerConfig,
    bin_width: usize,
    workers: usize,
) -> Result<TokenizerReport, MetricsError> {
    if bin_width == 0 {
        return Err(MetricsError::InvalidBinWidth);
    }
    if corpus.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let counts = count_corpus(corpus, vocab, config, workers)?;
    TokenizerReport::from_counts(&counts, bin_width, vocab.name(), &corpus.language_tag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wordpiece::VocabOptions;

    fn vocab(tokens: &[&str]) -> Vocabulary {
        Vocabulary::from_tokens(tokens.iter().copied(), VocabOptions::named("fixture")).unwrap()
    }

    fn fixture() -> Vocabulary {
        vocab(&["[UNK]", "un", "##able", "able"])
    }

    fn cfg() -> TokenizerConfig {
        TokenizerConfig::default()
    }

    #[test]
    fn unable_able() {
        let corpus = Corpus::from_forms("en", &[vec!["unable", "able"]]);
        let v = fixture();
        assert_eq!(fertility(&corpus, &v, &cfg()).unwrap(), 1.5);
        assert_eq!(continuation_proportion(&corpus, &v, &cfg()).unwrap(), 0.5);
        assert_eq!(unk_proportions(&corpus, &v, &cfg()).unwrap(), (0.0, 0.0));
        let (model, reference) = sentence_length_histogram(&corpus, &v, &cfg(), 1).unwrap();
        assert_eq!(model.bins, BTreeMap::from([(3, 1)]));
        assert_eq!(reference.bins, BTreeMap::from([(2, 1)]));
    }

    #[test]
    fn whole_words_have_fertility_one() {
        let corpus = Corpus::from_forms("en", &[vec!["able", "un", "able"]]);
        let v = fixture();
        assert_eq!(fertility(&corpus, &v, &cfg()).unwrap(), 1.0);
        assert_eq!(continuation_proportion(&corpus, &v, &cfg()).unwrap(), 0.0);
        let (model, reference) = sentence_length_histogram(&corpus, &v, &cfg(), 1).unwrap();
        assert_eq!(model.bins, BTreeMap::from([(3, 1)]));
        assert_eq!(reference.bins, BTreeMap::from([(3, 1)]));
    }

    #[test]
    fn unknown_words() {
        let v = vocab(&["[UNK]", "a"]);
        let corpus = Corpus::from_forms("x", &[vec!["xyz", "a"]]);
        assert_eq!(unk_proportions(&corpus, &v, &cfg()).unwrap(), (0.5, 0.5));
        let corpus = Corpus::from_forms("x", &[vec!["xyz", "xyz"]]);
        assert_eq!(unk_proportions(&corpus, &v, &cfg()).unwrap(), (1.0, 1.0));
        assert_eq!(continuation_proportion(&corpus, &v, &cfg()).unwrap(), 0.0);
        assert_eq!(fertility(&corpus, &v, &cfg()).unwrap(), 1.0);
    }

    #[test]
    fn mixed_unk_pieces_count_at_token_level_only() {
        let v = vocab(&["[UNK]", "don", "'"]);
        let corpus = Corpus::from_forms("en", &[vec!["don't"]]);
        let (token, word) = unk_proportions(&corpus, &v, &cfg()).unwrap();
        assert_eq!(word, 0.0);
        assert!((token - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let corpus = Corpus::from_forms::<&str>("x", &[]);
        let v = fixture();
        assert_eq!(
            fertility(&corpus, &v, &cfg()),
            Err(MetricsError::EmptyCorpus)
        );
        assert_eq!(
            continuation_proportion(&corpus, &v, &cfg()),
            Err(MetricsError::EmptyCorpus)
        );
        assert_eq!(
            unk_proportions(&corpus, &v, &cfg()),
            Err(MetricsError::EmptyCorpus)
        );
        assert_eq!(
            tokenizer_report(&corpus, &v, &cfg(), 5).unwrap_err(),
            MetricsError::EmptyCorpus
        );
    }

    #[test]
    fn bin_width() {
        let words: Vec<&str> = std::iter::repeat_n("able", 12).collect();
        let corpus = Corpus::from_forms("x", &[words]);
        let (model, _) = sentence_length_histogram(&corpus, &fixture(), &cfg(), 10).unwrap();
        assert_eq!(model.bins, BTreeMap::from([(1, 1)]));
        assert_eq!(
            sentence_length_histogram(&corpus, &fixture(), &cfg(), 0).unwrap_err(),
            MetricsError::InvalidBinWidth
        );
    }

    #[test]
    fn report_matches_standalone_operations() {
        let corpus = Corpus::from_forms(
            "en",
            &[
                vec!["unable", "able"],
                vec!["xyz", "able", "un"],
                vec!["ableable"],
            ],
        );
        let v = fixture();
        let report = tokenizer_report(&corpus, &v, &cfg(), 2).unwrap();
        assert_eq!(report.fertility, fertility(&corpus, &v, &cfg()).unwrap());
        assert_eq!(
            report.continuation_proportion,
            continuation_proportion(&corpus, &v, &cfg()).unwrap()
        );
        let (t, w) = unk_proportions(&corpus, &v, &cfg()).unwrap();
        assert_eq!(
            (report.unk_token_proportion, report.unk_word_proportion),
            (t, w)
        );
        let (model, reference) = sentence_length_histogram(&corpus, &v, &cfg(), 2).unwrap();
        assert_eq!(report.sentence_length_histogram, model);
        assert_eq!(report.reference_length_histogram, reference);
        assert_eq!(report.sentence_count, 3);
        assert_eq!(report.vocab_name, "fixture");
    }

    #[test]
    fn workers_do_not_change_counts() {
        let corpus = Corpus::from_forms(
            "en",
            &[
                vec!["unable", "able"],
                vec!["xyz"],
                vec!["un", "un", "able"],
                vec!["ableun"],
                vec!["unable"],
            ],
        );
        let v = fixture();
        let one = count_corpus(&corpus, &v, &cfg(), 1).unwrap();
        for workers in 2..8 {
            assert_eq!(count_corpus(&corpus, &v, &cfg(), workers).unwrap(), one);
        }
        assert_eq!(
            count_corpus(&corpus, &v, &cfg(), 0).unwrap_err(),
            MetricsError::InvalidWorkers
        );
    }
}
