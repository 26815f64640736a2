//! BERT-style vocabularies and greedy longest-match-first WordPiece.

mod normalize;
mod vocab;

pub use normalize::normalize_word;
pub use vocab::{
    load_vocab, VocabError, VocabOptions, Vocabulary, DEFAULT_CONTINUATION_PREFIX,
    DEFAULT_SPECIAL_TOKENS, DEFAULT_UNK_TOKEN,
};

use crate::conllu::Word;

pub const DEFAULT_MAX_CHARS_PER_WORD: usize = 100;

/// How a normalized fragment is split into vocabulary entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Segmentation {
    /// Greedy longest-match-first with a continuation prefix.
    #[default]
    WordPiece,
    /// One piece per character, looked up without a prefix. Characters
    /// missing from the vocabulary become UNK individually.
    Character,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub strip_accents: bool,
    pub max_chars_per_word: usize,
    pub isolate_punctuation: bool,
    pub isolate_cjk: bool,
    pub segmentation: Segmentation,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig::cased()
    }
}

impl TokenizerConfig {
    pub fn cased() -> Self {
        TokenizerConfig {
            lowercase: false,
            strip_accents: false,
            max_chars_per_word: DEFAULT_MAX_CHARS_PER_WORD,
            isolate_punctuation: true,
            isolate_cjk: true,
            segmentation: Segmentation::WordPiece,
        }
    }

    /// Lowercasing with accent stripping, as uncased BERT checkpoints do.
    pub fn uncased() -> Self {
        TokenizerConfig {
            lowercase: true,
            strip_accents: true,
            ..TokenizerConfig::cased()
        }
    }
}

/// Result of segmenting one fragment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    Pieces(Vec<u32>),
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedWord {
    pub source: String,
    pub pieces: Vec<u32>,
    pub is_unknown: bool,
}

impl TokenizedWord {
    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }
}

/// Segments a single normalized fragment.
pub fn wordpiece_segment(fragment: &str, vocab: &Vocabulary, config: &TokenizerConfig) -> Segment {
    let mut pieces = Vec::new();
    if segment_into(
        fragment,
        vocab,
        config,
        &mut pieces,
        &mut String::new(),
        false,
    ) {
        Segment::Pieces(pieces)
    } else {
        Segment::Unknown
    }
}

/// Appends the pieces of `fragment` to `out`; returns false when the whole
/// fragment is unknown. Pieces matched before a dead end are then removed
/// from `out` unless `keep_partial` is set.
fn segment_into(
    fragment: &str,
    vocab: &Vocabulary,
    config: &TokenizerConfig,
    out: &mut Vec<u32>,
    candidate: &mut String,
    keep_partial: bool,
) -> bool {
    let boundaries: Vec<usize> = fragment
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(fragment.len()))
        .collect();
    let char_count = boundaries.len() - 1;
    if char_count == 0 || char_count > config.max_chars_per_word {
        return false;
    }

    if config.segmentation == Segmentation::Character {
        out.extend(boundaries.windows(2).map(|w| {
            vocab
                .id(&fragment[w[0]..w[1]])
                .unwrap_or_else(|| vocab.unk_id())
        }));
        return true;
    }

    let prefix = vocab.continuation_prefix();
    let max_span = vocab.max_token_chars().max(1);
    let mark = out.len();
    let mut start = 0;
    while start < char_count {
        let mut end = char_count.min(start + max_span);
        let mut found = None;
        while end > start {
            candidate.clear();
            if start > 0 {
                candidate.push_str(prefix);
            }
            candidate.push_str(&fragment[boundaries[start]..boundaries[end]]);
            if let Some(id) = vocab.id(candidate) {
                found = Some(id);
                break;
            }
            end -= 1;
        }
        match found {
            Some(id) => {
                out.push(id);
                start = end;
            }
            None => {
                if !keep_partial {
                    out.truncate(mark);
                }
                return false;
            }
        }
    }
    true
}

/// Tokenizes one reference word: normalization, then segmentation of every
/// fragment. The word is unknown only when its whole output is a single UNK.
pub fn tokenize_word(word: &Word, vocab: &Vocabulary, config: &TokenizerConfig) -> TokenizedWord {
    tokenize_form(&word.form, vocab, config)
}

pub fn tokenize_form(form: &str, vocab: &Vocabulary, config: &TokenizerConfig) -> TokenizedWord {
    let mut pieces = Vec::new();
    let mut candidate = String::new();
    for fragment in normalize_word(form, config) {
        if !segment_into(&fragment, vocab, config, &mut pieces, &mut candidate, false) {
            pieces.push(vocab.unk_id());
        }
    }
    let is_unknown = pieces.len() == 1 && pieces[0] == vocab.unk_id();
    TokenizedWord {
        source: form.to_owned(),
        pieces,
        is_unknown,
    }
}

/// Every id the greedy search selects while tokenizing `form`, including
/// pieces matched on the way to a dead end that ends up as UNK. A token that
/// never appears here can be removed without changing how `form` tokenizes.
pub fn matched_ids(form: &str, vocab: &Vocabulary, config: &TokenizerConfig) -> Vec<u32> {
    let mut ids = Vec::new();
    let mut candidate = String::new();
    for fragment in normalize_word(form, config) {
        if !segment_into(&fragment, vocab, config, &mut ids, &mut candidate, true) {
            ids.push(vocab.unk_id());
        }
    }
    ids
}

/// Token strings for a list of ids; ids outside the vocabulary render as `?`.
pub fn piece_strings<'v>(pieces: &[u32], vocab: &'v Vocabulary) -> Vec<&'v str> {
    pieces
        .iter()
        .map(|&id| vocab.token(id).unwrap_or("?"))
        .collect()
}
