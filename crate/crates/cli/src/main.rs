mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

/// Tokenizer quality statistics for subword vocabularies over UD treebanks.
#[derive(Debug, Parser)]
#[command(name = "subword-stats", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fertility, continuation, UNK and sentence-length statistics for a corpus.
    Stats(StatsArgs),
    /// Share of one vocabulary covered by another.
    Compare(CompareArgs),
    /// Sentence-length histograms (model pieces vs. reference words).
    Histogram(StatsArgs),
    /// Spearman correlation of tokenizer-metric changes with score changes.
    Correlate(CorrelateArgs),
    /// Drop vocabulary entries the tokenizer never selects on a corpus.
    Prune(PruneArgs),
    /// Plan embedding initialization for a new vocabulary.
    Remap(RemapArgs),
    /// Download a vocabulary into the local cache and print its path.
    Fetch(FetchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Paper,
    SharedCopy,
}

#[derive(Debug, Args)]
pub struct CacheArgs {
    /// Vocabulary cache directory.
    #[arg(long, env = "SUBWORD_STATS_CACHE")]
    pub cache_dir: Option<PathBuf>,
    /// Model hub base URL; vocabularies are read from {base}/{model_id}/resolve/main/vocab.txt.
    #[arg(long, default_value = subword_stats_hub::DEFAULT_BASE_URL)]
    pub base_url: String,
}

#[derive(Debug, Args)]
pub struct VocabFlags {
    /// Continuation prefix marking non-initial pieces.
    #[arg(long, default_value = "##")]
    pub continuation_prefix: String,
    /// Token used for unknown input.
    #[arg(long, default_value = "[UNK]")]
    pub unk_token: String,
}

#[derive(Debug, Args)]
pub struct TokenizerFlags {
    /// Lowercase words before matching.
    #[arg(long)]
    pub lowercase: bool,
    /// Remove combining marks after canonical decomposition.
    #[arg(long)]
    pub strip_accents: bool,
    /// Split each character into its own piece instead of WordPiece.
    #[arg(long)]
    pub character_level: bool,
    /// Fragments longer than this map to UNK.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_chars_per_word: u64,
    /// Keep punctuation attached to the surrounding characters.
    #[arg(long)]
    pub keep_punctuation: bool,
}

#[derive(Debug, Args)]
pub struct OutputFlags {
    /// Output format (defaults per subcommand).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// CoNLL-U files, concatenated in the given order.
    #[arg(long, num_args = 1.., required = true)]
    pub corpus: Vec<PathBuf>,
    /// Language tag recorded in the report.
    #[arg(long, default_value = "und")]
    pub language: String,
    /// vocab.txt file.
    #[arg(
        long,
        conflicts_with = "model_id",
        required_unless_present = "model_id"
    )]
    pub vocab: Option<PathBuf>,
    /// Model hub identifier whose vocab.txt is fetched (or read from cache).
    #[arg(long)]
    pub model_id: Option<String>,
    /// Sentence-length histogram bin width.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub bin_width: u64,
    /// Sentence partitions processed in parallel; results do not depend on it.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
    #[command(flatten)]
    pub vocab_flags: VocabFlags,
    #[command(flatten)]
    pub tokenizer: TokenizerFlags,
    #[command(flatten)]
    pub output: OutputFlags,
    #[command(flatten)]
    pub cache: CacheArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Vocabulary whose coverage is measured.
    #[arg(
        long,
        conflicts_with = "model_id",
        required_unless_present = "model_id"
    )]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub model_id: Option<String>,
    /// Vocabulary providing the coverage.
    #[arg(
        long,
        conflicts_with = "reference_model_id",
        required_unless_present = "reference_model_id"
    )]
    pub reference_vocab: Option<PathBuf>,
    #[arg(long)]
    pub reference_model_id: Option<String>,
    #[command(flatten)]
    pub vocab_flags: VocabFlags,
    #[command(flatten)]
    pub output: OutputFlags,
    #[command(flatten)]
    pub cache: CacheArgs,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// Manifest JSON with per-language metrics and scores.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Leave a language out (repeatable).
    #[arg(long = "exclude-language")]
    pub exclude_languages: Vec<String>,
    /// Average TASK/SUB columns into one TASK column.
    #[arg(long)]
    pub average_subscores: bool,
    /// Include the baseline records as zero-change points.
    #[arg(long)]
    pub include_baseline: bool,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Args)]
pub struct PruneArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub corpus: Vec<PathBuf>,
    #[arg(
        long,
        conflicts_with = "model_id",
        required_unless_present = "model_id"
    )]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub model_id: Option<String>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
    /// Write the pruned vocab.txt here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub vocab_flags: VocabFlags,
    #[command(flatten)]
    pub tokenizer: TokenizerFlags,
    #[command(flatten)]
    pub cache: CacheArgs,
}

#[derive(Debug, Args)]
pub struct RemapArgs {
    /// Vocabulary of the model whose embeddings are reused.
    #[arg(
        long,
        conflicts_with = "model_id",
        required_unless_present = "model_id"
    )]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub model_id: Option<String>,
    /// Vocabulary the embeddings are planned for.
    #[arg(
        long,
        conflicts_with = "new_model_id",
        required_unless_present = "new_model_id"
    )]
    pub new_vocab: Option<PathBuf>,
    #[arg(long)]
    pub new_model_id: Option<String>,
    #[arg(long, value_enum, default_value = "paper")]
    pub mode: ModeArg,
    #[command(flatten)]
    pub vocab_flags: VocabFlags,
    #[command(flatten)]
    pub output: OutputFlags,
    #[command(flatten)]
    pub cache: CacheArgs,
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    #[arg(long)]
    pub model_id: String,
    #[command(flatten)]
    pub cache: CacheArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
