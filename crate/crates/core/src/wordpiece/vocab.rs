use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, BufReader, Read, Write};

use thiserror::Error;

pub const DEFAULT_CONTINUATION_PREFIX: &str = "##";
pub const DEFAULT_UNK_TOKEN: &str = "[UNK]";
pub const DEFAULT_SPECIAL_TOKENS: [&str; 5] = ["[CLS]", "[SEP]", "[PAD]", "[UNK]", "[MASK]"];

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("vocabulary is empty")]
    Empty,
    #[error("duplicate token {token:?} on lines {first} and {second}")]
    Duplicate {
        token: String,
        first: usize,
        second: usize,
    },
    #[error("unknown token {0:?} is not in the vocabulary")]
    MissingUnk(String),
    #[error("line {0}: invalid UTF-8")]
    Encoding(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How a vocab.txt file is interpreted.
#[derive(Debug, Clone)]
pub struct VocabOptions {
    pub name: String,
    pub continuation_prefix: String,
    pub special_tokens: BTreeSet<String>,
    pub unk_token: String,
}

impl Default for VocabOptions {
    fn default() -> Self {
        VocabOptions {
            name: String::new(),
            continuation_prefix: DEFAULT_CONTINUATION_PREFIX.to_owned(),
            special_tokens: DEFAULT_SPECIAL_TOKENS
                .iter()
                .map(|s| s.to_string())
                .collect(),
            unk_token: DEFAULT_UNK_TOKEN.to_owned(),
        }
    }
}

impl VocabOptions {
    pub fn named(name: impl Into<String>) -> Self {
        VocabOptions {
            name: name.into(),
            ..Default::default()
        }
    }
}

/// An ordered subword inventory. A token's id is its position.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
    unk_id: u32,
    max_token_chars: usize,
    options: VocabOptions,
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.tokens == other.tokens
            && self.options.continuation_prefix == other.options.continuation_prefix
            && self.options.special_tokens == other.options.special_tokens
            && self.options.unk_token == other.options.unk_token
    }
}

impl Vocabulary {
    /// Builds a vocabulary from tokens in id order.
    pub fn from_tokens<I, S>(tokens: I, options: VocabOptions) -> Result<Self, VocabError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        if tokens.is_empty() {
            return Err(VocabError::Empty);
        }
        let mut ids = HashMap::with_capacity(tokens.len());
        let mut max_token_chars = 0;
        for (i, token) in tokens.iter().enumerate() {
            if let Some(first) = ids.insert(token.clone(), i as u32) {
                return Err(VocabError::Duplicate {
                    token: token.clone(),
                    first: first as usize + 1,
                    second: i + 1,
                });
            }
            max_token_chars = max_token_chars.max(token.chars().count());
        }
        let unk_id = *ids
            .get(&options.unk_token)
            .ok_or_else(|| VocabError::MissingUnk(options.unk_token.clone()))?;
        Ok(Vocabulary {
            tokens,
            ids,
            unk_id,
            max_token_chars,
            options,
        })
    }

    pub fn name(&self) -> &str {
        &self.options.name
    }

    pub fn options(&self) -> &VocabOptions {
        &self.options
    }

    pub fn continuation_prefix(&self) -> &str {
        &self.options.continuation_prefix
    }

    /// Special tokens that are actually present in this vocabulary.
    pub fn special_tokens(&self) -> impl Iterator<Item = &str> {
        self.options
            .special_tokens
            .iter()
            .map(String::as_str)
            .filter(|t| self.ids.contains_key(*t))
    }

    pub fn is_special(&self, token: &str) -> bool {
        self.options.special_tokens.contains(token)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn unk_id(&self) -> u32 {
        self.unk_id
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.ids.contains_key(token)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Length in characters of the longest entry, prefix included.
    pub fn max_token_chars(&self) -> usize {
        self.max_token_chars
    }

    /// Writes the vocab.txt form: one token per line, newline-terminated.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for token in &self.tokens {
            out.write_all(token.as_bytes())?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Reads a vocab.txt stream: one token per line, the zero-based line index
/// is the id. A final trailing newline is tolerated; CRLF endings are
/// stripped.
pub fn load_vocab<R: Read>(reader: R, options: VocabOptions) -> Result<Vocabulary, VocabError> {
    let mut reader = BufReader::new(reader);
    let mut tokens = Vec::new();
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        let mut raw: &[u8] = &buf;
        if let Some(rest) = raw.strip_suffix(b"\n") {
            raw = rest;
        }
        if let Some(rest) = raw.strip_suffix(b"\r") {
            raw = rest;
        }
        let line = std::str::from_utf8(raw).map_err(|_| VocabError::Encoding(tokens.len() + 1))?;
        tokens.push(line.to_owned());
    }
    Vocabulary::from_tokens(tokens, options)
}
