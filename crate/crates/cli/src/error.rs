use std::fmt;
use std::path::Path;

use subword_stats::{AnalysisError, CorpusError, MetricsError, VocabError, VocabToolsError};
use subword_stats_hub::HubError;

/// Failure classes, each with its own process exit code.
#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Io(String),
    Network(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 1,
            CliError::Io(_) => 2,
            CliError::Network(_) => 3,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) | CliError::Io(m) | CliError::Network(m) => f.write_str(m),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        if e.is_parse_error() {
            CliError::Parse(e.to_string())
        } else {
            CliError::Io(e.to_string())
        }
    }
}

impl From<VocabError> for CliError {
    fn from(e: VocabError) -> Self {
        match e {
            VocabError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Parse(e.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<VocabToolsError> for CliError {
    fn from(e: VocabToolsError) -> Self {
        match e {
            VocabToolsError::Vocab(v) => v.into(),
            other => CliError::Parse(other.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match &e {
            AnalysisError::Json(j) if j.is_io() => CliError::Io(e.to_string()),
            _ => CliError::Parse(e.to_string()),
        }
    }
}

impl From<HubError> for CliError {
    fn from(e: HubError) -> Self {
        match e {
            HubError::InvalidModelId(_) => CliError::Parse(e.to_string()),
            ref n if n.is_network() => CliError::Network(e.to_string()),
            _ => CliError::Io(e.to_string()),
        }
    }
}
