//! Fetches plain `vocab.txt` files by model identifier and keeps them in a
//! local, digest-checked cache.
//!
//! The cache directory holds one file per model under `vocabs/` plus an
//! `index.json` describing each entry. Downloads are written to a temporary
//! file in the cache directory and renamed into place, so a reader never
//! observes a partially written vocabulary.

mod models;

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;
use thiserror::Error;

pub use models::{known_model, KnownModel, KNOWN_MODELS, MULTILINGUAL_MODEL};

pub const DEFAULT_BASE_URL: &str = "https://huggingface.co";
/// Path of the vocabulary file below `{base_url}/{model_id}/`.
pub const DEFAULT_VOCAB_FILE: &str = "resolve/main/vocab.txt";
/// Environment variable that overrides the default cache directory.
pub const CACHE_DIR_ENV: &str = "SUBWORD_STATS_CACHE";

const INDEX_FILE: &str = "index.json";
const LOCK_FILE: &str = ".lock";
const MAX_VOCAB_BYTES: u64 = 64 * 1024 * 1024;

#[derive(Debug, Error)]
pub enum HubError {
    #[error("model {model_id:?} not found at {url}")]
    ModelNotFound { model_id: String, url: String },
    #[error("{url} is unavailable and {model_id:?} is not cached: {reason}")]
    Unavailable {
        model_id: String,
        url: String,
        reason: String,
    },
    #[error("{url} returned HTTP {status}")]
    Http { url: String, status: u16 },
    #[error("integrity check failed for {model_id:?}: {reason}")]
    Integrity { model_id: String, reason: String },
    #[error("invalid model id {0:?}")]
    InvalidModelId(String),
    #[error("cache index {}: {source}", path.display())]
    Index {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("cache I/O at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HubError {
    /// True for failures caused by the network or remote side.
    pub fn is_network(&self) -> bool {
        matches!(
            self,
            HubError::ModelNotFound { .. }
                | HubError::Unavailable { .. }
                | HubError::Http { .. }
                | HubError::Integrity { .. }
        )
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HubError + '_ {
    move |source| HubError::Io {
        path: path.to_owned(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub model_id: String,
    pub url: String,
    /// Relative to the cache directory.
    pub local_path: PathBuf,
    pub content_digest: String,
    pub fetched_at: DateTime<Utc>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct CacheIndex {
    entries: BTreeMap<String, CacheEntry>,
}

/// Where vocabularies come from and where they are kept.
#[derive(Debug, Clone)]
pub struct VocabCache {
    cache_dir: PathBuf,
    base_url: String,
    vocab_file: String,
    timeout: Duration,
}

/// `$SUBWORD_STATS_CACHE`, else `$XDG_CACHE_HOME/subword-stats`, else
/// `$HOME/.cache/subword-stats`, else `./.subword-stats-cache`.
pub fn default_cache_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os(CACHE_DIR_ENV) {
        return PathBuf::from(dir);
    }
    if let Some(dir) = std::env::var_os("XDG_CACHE_HOME") {
        return PathBuf::from(dir).join("subword-stats");
    }
    if let Some(home) = std::env::var_os("HOME") {
        return PathBuf::from(home).join(".cache").join("subword-stats");
    }
    PathBuf::from(".subword-stats-cache")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn file_digest(path: &Path) -> std::io::Result<String> {
    let mut hasher = Sha256::new();
    let mut file = File::open(path)?;
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn validate_model_id(model_id: &str) -> Result<(), HubError> {
    let ok = !model_id.is_empty()
        && model_id.split('/').all(|part| {
            !part.is_empty()
                && part != "."
                && part != ".."
                && part
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        });
    if ok {
        Ok(())
    } else {
        Err(HubError::InvalidModelId(model_id.to_owned()))
    }
}

impl VocabCache {
    pub fn new(cache_dir: impl Into<PathBuf>) -> Self {
        VocabCache {
            cache_dir: cache_dir.into(),
            base_url: DEFAULT_BASE_URL.to_owned(),
            vocab_file: DEFAULT_VOCAB_FILE.to_owned(),
            timeout: Duration::from_secs(60),
        }
    }

    pub fn with_base_url(mut self, base_url: impl Into<String>) -> Self {
        self.base_url = base_url.into().trim_end_matches('/').to_owned();
        self
    }

    pub fn with_vocab_file(mut self, vocab_file: impl Into<String>) -> Self {
        self.vocab_file = vocab_file.into().trim_start_matches('/').to_owned();
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn cache_dir(&self) -> &Path {
        &self.cache_dir
    }

    pub fn url_for(&self, model_id: &str) -> String {
        format!("{}/{}/{}", self.base_url, model_id, self.vocab_file)
    }

    fn relative_path(model_id: &str) -> PathBuf {
        PathBuf::from("vocabs")
            .join(model_id.replace('/', "--"))
            .join("vocab.txt")
    }

    fn index_path(&self) -> PathBuf {
        self.cache_dir.join(INDEX_FILE)
    }

    fn read_index(&self) -> Result<CacheIndex, HubError> {
        let path = self.index_path();
        match fs::read(&path) {
            Ok(bytes) => {
                serde_json::from_slice(&bytes).map_err(|source| HubError::Index { path, source })
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(CacheIndex::default()),
            Err(e) => Err(io_err(&path)(e)),
        }
    }

    /// The recorded entry for `model_id`, if any.
    pub fn entry(&self, model_id: &str) -> Result<Option<CacheEntry>, HubError> {
        Ok(self.read_index()?.entries.remove(model_id))
    }

    /// Returns the cached path when the entry exists and its digest still
    /// matches the file on disk.
    pub fn cached(&self, model_id: &str) -> Result<Option<PathBuf>, HubError> {
        let Some(entry) = self.entry(model_id)? else {
            return Ok(None);
        };
        let path = self.cache_dir.join(&entry.local_path);
        match file_digest(&path) {
            Ok(digest) if digest == entry.content_digest => Ok(Some(path)),
            _ => Ok(None),
        }
    }

    /// Returns a local path to the vocabulary of `model_id`, downloading it
    /// only when no digest-valid copy is cached.
    pub fn fetch(&self, model_id: &str) -> Result<PathBuf, HubError> {
        validate_model_id(model_id)?;
        if let Some(path) = self.cached(model_id)? {
            return Ok(path);
        }
        let url = self.url_for(model_id);
        let bytes = self.download(model_id, &url)?;
        self.store(model_id, &url, &bytes)
    }

    fn download(&self, model_id: &str, url: &str) -> Result<Vec<u8>, HubError> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let unavailable = |reason: String| HubError::Unavailable {
            model_id: model_id.to_owned(),
            url: url.to_owned(),
            reason,
        };
        let mut response = agent
            .get(url)
            .call()
            .map_err(|e| unavailable(e.to_string()))?;
        let status = response.status().as_u16();
        if status == 404 {
            return Err(HubError::ModelNotFound {
                model_id: model_id.to_owned(),
                url: url.to_owned(),
            });
        }
        if !(200..300).contains(&status) {
            return Err(HubError::Http {
                url: url.to_owned(),
                status,
            });
        }
        let expected_len = response.body().content_length();
        let bytes = response
            .body_mut()
            .with_config()
            .limit(MAX_VOCAB_BYTES)
            .read_to_vec()
            .map_err(|e| unavailable(e.to_string()))?;
        if let Some(len) = expected_len {
            if len != bytes.len() as u64 {
                return Err(HubError::Integrity {
                    model_id: model_id.to_owned(),
                    reason: format!("expected {len} bytes, received {}", bytes.len()),
                });
            }
        }
        Ok(bytes)
    }

    fn store(&self, model_id: &str, url: &str, bytes: &[u8]) -> Result<PathBuf, HubError> {
        let relative = Self::relative_path(model_id);
        let final_path = self.cache_dir.join(&relative);
        let dir = final_path.parent().expect("cache path has a parent");
        fs::create_dir_all(dir).map_err(io_err(dir))?;

        let digest = sha256_hex(bytes);
        let mut tmp = NamedTempFile::new_in(dir).map_err(io_err(dir))?;
        tmp.write_all(bytes).map_err(io_err(tmp.path()))?;
        tmp.as_file().sync_all().map_err(io_err(tmp.path()))?;
        let written = file_digest(tmp.path()).map_err(io_err(tmp.path()))?;
        if written != digest {
            return Err(HubError::Integrity {
                model_id: model_id.to_owned(),
                reason: format!("digest {written} of written file differs from {digest}"),
            });
        }
        tmp.persist(&final_path)
            .map_err(|e| io_err(&final_path)(e.error))?;

        let entry = CacheEntry {
            model_id: model_id.to_owned(),
            url: url.to_owned(),
            local_path: relative,
            content_digest: digest,
            fetched_at: Utc::now(),
        };
        self.record(entry)?;
        Ok(final_path)
    }

    /// Read-modify-write of the index under an exclusive lock, published by
    /// rename.
    fn record(&self, entry: CacheEntry) -> Result<(), HubError> {
        let lock_path = self.cache_dir.join(LOCK_FILE);
        let lock = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&lock_path)
            .map_err(io_err(&lock_path))?;
        lock.lock().map_err(io_err(&lock_path))?;

        let mut index = self.read_index()?;
        index.entries.insert(entry.model_id.clone(), entry);
        let index_path = self.index_path();
        let mut tmp = NamedTempFile::new_in(&self.cache_dir).map_err(io_err(&self.cache_dir))?;
        let text = serde_json::to_vec_pretty(&index).map_err(|source| HubError::Index {
            path: index_path.clone(),
            source,
        })?;
        tmp.write_all(&text).map_err(io_err(tmp.path()))?;
        tmp.persist(&index_path)
            .map_err(|e| io_err(&index_path)(e.error))?;
        lock.unlock().map_err(io_err(&lock_path))?;
        Ok(())
    }
}

/// Convenience wrapper: fetch `model_id` from `base_url` into `cache_dir`.
pub fn fetch_vocab(model_id: &str, base_url: &str, cache_dir: &Path) -> Result<PathBuf, HubError> {
    VocabCache::new(cache_dir)
        .with_base_url(base_url)
        .fetch(model_id)
}
