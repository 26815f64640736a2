//! Reference implementations used only by tests. They share no code with
//! the library and favor obviousness over speed.
#![allow(dead_code)]

use std::collections::HashSet;

pub const UNK: &str = "[UNK]";

/// Greedy longest-prefix segmentation by exhaustive search: at each
/// position every prefix length is tried and the longest one present in
/// the vocabulary wins. `None` means the word maps to UNK.
pub fn greedy_segment(
    word: &str,
    vocab: &HashSet<String>,
    prefix: &str,
    max_chars: usize,
) -> Option<Vec<String>> {
    let chars: Vec<char> = word.chars().collect();
    if chars.is_empty() || chars.len() > max_chars {
        return None;
    }
    let mut pieces = Vec::new();
    let mut pos = 0;
    while pos < chars.len() {
        let mut best: Option<(usize, String)> = None;
        for len in 1..=chars.len() - pos {
            let body: String = chars[pos..pos + len].iter().collect();
            let form = if pos == 0 {
                body
            } else {
                format!("{prefix}{body}")
            };
            if vocab.contains(&form) {
                best = Some((len, form));
            }
        }
        let (len, form) = best?;
        pieces.push(form);
        pos += len;
    }
    Some(pieces)
}

/// Pieces for one fragment, with UNK spelled out.
pub fn segment_or_unk(
    word: &str,
    vocab: &HashSet<String>,
    prefix: &str,
    max_chars: usize,
) -> Vec<String> {
    greedy_segment(word, vocab, prefix, max_chars).unwrap_or_else(|| vec![UNK.to_owned()])
}

fn is_cjk_ideograph(c: char) -> bool {
    ('\u{4E00}'..='\u{9FFF}').contains(&c)
}

/// Fragmenting for cased input built from ASCII letters, Latin letters with
/// precomposed accents, CJK ideographs and the punctuation marks listed here.
pub fn simple_fragments(word: &str) -> Vec<String> {
    const EXTRA_PUNCT: &str = "\u{2014}«»";
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in word.chars() {
        if c.is_ascii_punctuation() || EXTRA_PUNCT.contains(c) || is_cjk_ideograph(c) {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            out.push(c.to_string());
        } else {
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Tallies for a corpus tokenized word by word.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Tally {
    pub words: u64,
    pub pieces: u64,
    pub continued: u64,
    pub unk_pieces: u64,
    pub unk_words: u64,
    pub sentence_pieces: Vec<u64>,
    pub sentence_words: Vec<u64>,
}

pub fn tally<F>(sentences: &[Vec<String>], mut tokenize: F) -> Tally
where
    F: FnMut(&str) -> Vec<String>,
{
    let mut t = Tally::default();
    for sentence in sentences {
        let mut in_sentence = 0;
        for word in sentence {
            let pieces = tokenize(word);
            t.words += 1;
            t.pieces += pieces.len() as u64;
            in_sentence += pieces.len() as u64;
            if pieces.len() >= 2 {
                t.continued += 1;
            }
            let unk = pieces.iter().filter(|p| *p == UNK).count() as u64;
            t.unk_pieces += unk;
            if pieces.len() == 1 && unk == 1 {
                t.unk_words += 1;
            }
        }
        t.sentence_pieces.push(in_sentence);
        t.sentence_words.push(sentence.len() as u64);
    }
    t
}

/// Rank of each value: 1 + (number strictly smaller) + (ties - 1) / 2.
pub fn explicit_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            let less = v.iter().filter(|&&y| y < x).count() as f64;
            let equal = v.iter().filter(|&&y| y == x).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

/// Pearson correlation of explicit average ranks via the covariance formula.
pub fn spearman_oracle(xs: &[f64], ys: &[f64]) -> f64 {
    let rx = explicit_ranks(xs);
    let ry = explicit_ranks(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx
        .iter()
        .zip(&ry)
        .map(|(a, b)| (a - mx) * (b - my))
        .sum::<f64>()
        / n;
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum::<f64>() / n;
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum::<f64>() / n;
    cov / (vx.sqrt() * vy.sqrt())
}
