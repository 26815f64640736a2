//! Tokenizer quality statistics for subword vocabularies measured against
//! the human word segmentation of Universal Dependencies treebanks.

pub mod analysis;
pub mod conllu;
pub mod json;
pub mod metrics;
pub mod vocabtools;
pub mod wordpiece;

pub use analysis::{
    correlation_matrix, relative_change, spearman, AnalysisError, CorrelationMatrix,
    CorrelationOptions, Manifest, Orientation,
};
pub use conllu::{load_corpus, parse_conllu, Corpus, CorpusError, Sentence, Word};
pub use metrics::{
    continuation_proportion, fertility, sentence_length_histogram, tokenizer_report,
    tokenizer_report_with_workers, unk_proportions, Histogram, MetricCounts, MetricsError,
    TokenizerReport,
};
pub use vocabtools::{
    overlap, prune_vocab, remap_plan, OverlapResult, RemapAction, RemapMode, RemapPlan,
    VocabToolsError,
};
pub use wordpiece::{
    load_vocab, matched_ids, normalize_word, tokenize_word, wordpiece_segment, Segment,
    Segmentation, TokenizedWord, TokenizerConfig, VocabError, VocabOptions, Vocabulary,
};
