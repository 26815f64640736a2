//! Reading CoNLL-U treebanks into reference-tokenized sentences.
//!
//! Only the ID and FORM columns are interpreted. Integer-id rows are the
//! syntactic words that every per-word statistic is averaged over;
//! multiword-token range rows (`3-4`) and empty nodes (`5.1`) are skipped.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

const COLUMN_COUNT: usize = 10;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<CorpusError>,
    },
}

impl CorpusError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        CorpusError::Parse {
            line,
            message: message.into(),
        }
    }

    /// True when the failure came from malformed input rather than I/O.
    pub fn is_parse_error(&self) -> bool {
        match self {
            CorpusError::Parse { .. } => true,
            CorpusError::Io { .. } => false,
            CorpusError::InFile { source, .. } => source.is_parse_error(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    pub form: String,
    pub index: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub words: Vec<Word>,
    pub source_id: Option<String>,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    pub language_tag: String,
    pub word_count: usize,
}

impl Corpus {
    /// Builds a corpus from already validated sentences, computing `word_count`.
    pub fn from_sentences(language_tag: impl Into<String>, sentences: Vec<Sentence>) -> Self {
        let word_count = sentences.iter().map(Sentence::len).sum();
        Corpus {
            sentences,
            language_tag: language_tag.into(),
            word_count,
        }
    }

    /// Convenience constructor used by tests and tools: one sentence per
    /// slice of word forms, indices assigned from 1.
    pub fn from_forms<S: AsRef<str>>(language_tag: &str, sentences: &[Vec<S>]) -> Self {
        let sentences = sentences
            .iter()
            .map(|forms| Sentence {
                words: forms
                    .iter()
                    .enumerate()
                    .map(|(i, f)| Word {
                        form: f.as_ref().to_owned(),
                        index: i as u32 + 1,
                    })
                    .collect(),
                source_id: None,
            })
            .collect();
        Corpus::from_sentences(language_tag, sentences)
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word_count == 0
    }

    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.sentences.iter().flat_map(|s| s.words.iter())
    }
}

enum RowId {
    Word(u32),
    Skip,
}

fn classify_id(id: &str, line: usize) -> Result<RowId, CorpusError> {
    if id.contains('-') || id.contains('.') {
        return Ok(RowId::Skip);
    }
    match id.parse::<u32>() {
        Ok(n) if n >= 1 && id.bytes().all(|b| b.is_ascii_digit()) => Ok(RowId::Word(n)),
        _ => Err(CorpusError::parse(line, format!("invalid word id {id:?}"))),
    }
}

struct SentenceBuilder {
    words: Vec<Word>,
    source_id: Option<String>,
}

impl SentenceBuilder {
    fn new() -> Self {
        SentenceBuilder {
            words: Vec::new(),
            source_id: None,
        }
    }

    fn finish(&mut self, out: &mut Vec<Sentence>) {
        let words = std::mem::take(&mut self.words);
        let source_id = self.source_id.take();
        if !words.is_empty() {
            out.push(Sentence { words, source_id });
        }
    }
}

/// Parses CoNLL-U text. Empty input yields an empty corpus.
pub fn parse_conllu<R: Read>(reader: R, language_tag: &str) -> Result<Corpus, CorpusError> {
    let mut reader = BufReader::new(reader);
    let mut sentences = Vec::new();
    let mut current = SentenceBuilder::new();
    let mut buf = Vec::new();
    let mut line_no = 0usize;

    loop {
        buf.clear();
        let n = reader
            .read_until(b'\n', &mut buf)
            .map_err(|e| CorpusError::parse(line_no + 1, format!("read failed: {e}")))?;
        if n == 0 {
            break;
        }
        line_no += 1;
        let mut raw: &[u8] = &buf;
        if let Some(rest) = raw.strip_suffix(b"\n") {
            raw = rest;
        }
        if let Some(rest) = raw.strip_suffix(b"\r") {
            raw = rest;
        }
        if line_no == 1 {
            if let Some(rest) = raw.strip_prefix(b"\xEF\xBB\xBF") {
                raw = rest;
            }
        }
        let line =
            std::str::from_utf8(raw).map_err(|_| CorpusError::parse(line_no, "invalid UTF-8"))?;

        if line.trim().is_empty() {
            current.finish(&mut sentences);
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                if key.trim() == "sent_id" {
                    current.source_id = Some(value.trim().to_owned());
                }
            }
            continue;
        }

        let columns: Vec<&str> = line.split('\t').collect();
        if columns.len() != COLUMN_COUNT {
            return Err(CorpusError::parse(
                line_no,
                format!(
                    "expected {COLUMN_COUNT} tab-separated columns, found {}",
                    columns.len()
                ),
            ));
        }
        let index = match classify_id(columns[0], line_no)? {
            RowId::Word(index) => index,
            RowId::Skip => continue,
        };
        let expected = current.words.last().map_or(1, |w| w.index + 1);
        if index != expected {
            return Err(CorpusError::parse(
                line_no,
                format!("word id {index} out of sequence, expected {expected}"),
            ));
        }
        let form = columns[1];
        if form.is_empty() {
            return Err(CorpusError::parse(line_no, "empty FORM column"));
        }
        current.words.push(Word {
            form: form.to_owned(),
            index,
        });
    }
    current.finish(&mut sentences);

    Ok(Corpus::from_sentences(language_tag, sentences))
}

/// Parses each file (concurrently) and concatenates the sentences in path order.
pub fn load_corpus<P: AsRef<Path> + Sync>(
    paths: &[P],
    language_tag: &str,
) -> Result<Corpus, CorpusError> {
    let parts: Vec<Result<Corpus, CorpusError>> = paths
        .par_iter()
        .map(|path| {
            let path = path.as_ref();
            let file = File::open(path).map_err(|source| CorpusError::Io {
                path: path.to_owned(),
                source,
            })?;
            parse_conllu(file, language_tag).map_err(|e| CorpusError::InFile {
                path: path.to_owned(),
                source: Box::new(e),
            })
        })
        .collect();

    let mut sentences = Vec::new();
    for part in parts {
        sentences.extend(part?.sentences);
    }
    Ok(Corpus::from_sentences(language_tag, sentences))
}
