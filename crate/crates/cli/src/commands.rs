use std::collections::BTreeSet;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use subword_stats::json;
use subword_stats::metrics::{self, TokenizerReport};
use subword_stats::vocabtools::{self, RemapAction};
use subword_stats::{
    load_corpus, load_vocab, Corpus, CorrelationOptions, Manifest, RemapMode, Segmentation,
    TokenizerConfig, VocabOptions, Vocabulary,
};
use subword_stats_hub::{default_cache_dir, VocabCache};

use crate::error::CliError;
use crate::{
    CacheArgs, Command, CompareArgs, CorrelateArgs, FetchArgs, Format, ModeArg, OutputFlags,
    PruneArgs, RemapArgs, Result, StatsArgs, TokenizerFlags, VocabFlags,
};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Stats(args) => stats(args),
        Command::Histogram(args) => histogram(args),
        Command::Compare(args) => compare(args),
        Command::Correlate(args) => correlate(args),
        Command::Prune(args) => prune(args),
        Command::Remap(args) => remap(args),
        Command::Fetch(args) => fetch(args),
    }
}

fn cache(args: &CacheArgs) -> VocabCache {
    let dir = args.cache_dir.clone().unwrap_or_else(default_cache_dir);
    VocabCache::new(dir).with_base_url(&args.base_url)
}

fn load_vocab_spec(
    path: Option<&Path>,
    model_id: Option<&str>,
    flags: &VocabFlags,
    cache_args: &CacheArgs,
) -> Result<Vocabulary> {
    let (path, name): (PathBuf, String) = match (path, model_id) {
        (Some(path), _) => (path.to_owned(), path.display().to_string()),
        (None, Some(id)) => (cache(cache_args).fetch(id)?, id.to_owned()),
        (None, None) => return Err(CliError::Parse("a vocabulary is required".into())),
    };
    let file = File::open(&path).map_err(|e| CliError::io(&path, e))?;
    let options = VocabOptions {
        name,
        continuation_prefix: flags.continuation_prefix.clone(),
        unk_token: flags.unk_token.clone(),
        ..VocabOptions::default()
    };
    load_vocab(file, options).map_err(|e| match e {
        subword_stats::VocabError::Io(io) => CliError::io(&path, io),
        other => CliError::Parse(format!("{}: {other}", path.display())),
    })
}

fn tokenizer_config(flags: &TokenizerFlags) -> TokenizerConfig {
    TokenizerConfig {
        lowercase: flags.lowercase,
        strip_accents: flags.strip_accents,
        max_chars_per_word: flags.max_chars_per_word as usize,
        isolate_punctuation: !flags.keep_punctuation,
        isolate_cjk: true,
        segmentation: if flags.character_level {
            Segmentation::Character
        } else {
            Segmentation::WordPiece
        },
    }
}

fn workers(requested: Option<u64>) -> usize {
    requested.map_or_else(
        || std::thread::available_parallelism().map_or(1, |n| n.get()),
        |n| n as usize,
    )
}

fn load_nonempty_corpus(paths: &[PathBuf], language: &str) -> Result<Corpus> {
    let corpus = load_corpus(paths, language)?;
    if corpus.is_empty() {
        return Err(CliError::Parse(format!(
            "corpus {} contains no words",
            paths
                .iter()
                .map(|p| p.display().to_string())
                .collect::<Vec<_>>()
                .join(", ")
        )));
    }
    Ok(corpus)
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

fn emit_formatted(
    flags: &OutputFlags,
    default: Format,
    json: impl FnOnce() -> String,
    csv: impl FnOnce() -> String,
) -> Result<()> {
    let text = match flags.format.unwrap_or(default) {
        Format::Json => json(),
        Format::Csv => csv(),
    };
    emit(flags.output.as_deref(), &text)
}

fn report(args: &StatsArgs) -> Result<TokenizerReport> {
    let vocab = load_vocab_spec(
        args.vocab.as_deref(),
        args.model_id.as_deref(),
        &args.vocab_flags,
        &args.cache,
    )?;
    let corpus = load_nonempty_corpus(&args.corpus, &args.language)?;
    let config = tokenizer_config(&args.tokenizer);
    Ok(metrics::tokenizer_report_with_workers(
        &corpus,
        &vocab,
        &config,
        args.bin_width as usize,
        workers(args.workers),
    )?)
}

fn stats(args: StatsArgs) -> Result<()> {
    let report = report(&args)?;
    emit_formatted(
        &args.output,
        Format::Json,
        || json::to_string(&report.to_json()),
        || {
            let f = json::format_fixed;
            let rows = [
                ("language_tag", report.language_tag.clone()),
                ("vocab_name", report.vocab_name.clone()),
                ("fertility", f(report.fertility)),
                ("continuation_proportion", f(report.continuation_proportion)),
                ("unk_token_proportion", f(report.unk_token_proportion)),
                ("unk_word_proportion", f(report.unk_word_proportion)),
                ("word_count", report.word_count.to_string()),
                ("subword_count", report.subword_count.to_string()),
                (
                    "continued_word_count",
                    report.continued_word_count.to_string(),
                ),
                ("unk_piece_count", report.unk_piece_count.to_string()),
                ("unk_word_count", report.unk_word_count.to_string()),
                ("sentence_count", report.sentence_count.to_string()),
            ];
            let mut out = String::from("metric,value\n");
            for (k, v) in rows {
                out.push_str(&format!("{k},{}\n", csv_field(&v)));
            }
            out
        },
    )
}

fn histogram(args: StatsArgs) -> Result<()> {
    let report = report(&args)?;
    let model = &report.sentence_length_histogram;
    let reference = &report.reference_length_histogram;
    emit_formatted(
        &args.output,
        Format::Csv,
        || {
            json::to_string(&serde_json::json!({
                "language_tag": report.language_tag,
                "vocab_name": report.vocab_name,
                "bin_width": model.bin_width,
                "model": model.to_json(),
                "reference": reference.to_json(),
            }))
        },
        || {
            let last = model
                .bins
                .keys()
                .chain(reference.bins.keys())
                .max()
                .copied()
                .unwrap_or(0);
            let mut out = String::from("bin,lower,upper,model_sentences,reference_sentences\n");
            for bin in 0..=last {
                out.push_str(&format!(
                    "{bin},{},{},{},{}\n",
                    bin * model.bin_width,
                    (bin + 1) * model.bin_width,
                    model.get(bin),
                    reference.get(bin)
                ));
            }
            out
        },
    )
}

fn compare(args: CompareArgs) -> Result<()> {
    let a = load_vocab_spec(
        args.vocab.as_deref(),
        args.model_id.as_deref(),
        &args.vocab_flags,
        &args.cache,
    )?;
    let b = load_vocab_spec(
        args.reference_vocab.as_deref(),
        args.reference_model_id.as_deref(),
        &args.vocab_flags,
        &args.cache,
    )?;
    let result = vocabtools::overlap(&a, &b);
    emit_formatted(
        &args.output,
        Format::Json,
        || {
            let mut value = result.to_json();
            value["vocab_a"] = a.name().into();
            value["vocab_b"] = b.name().into();
            json::to_string(&value)
        },
        || {
            format!(
                "vocab_a,vocab_b,size_a,size_b,shared,proportion_a_in_b\n{},{},{},{},{},{}\n",
                csv_field(a.name()),
                csv_field(b.name()),
                result.size_a,
                result.size_b,
                result.shared,
                json::format_fixed(result.proportion_a_in_b)
            )
        },
    )
}

fn correlate(args: CorrelateArgs) -> Result<()> {
    let file = File::open(&args.manifest).map_err(|e| CliError::io(&args.manifest, e))?;
    let manifest =
        Manifest::from_reader(file).map_err(|e| CliError::from(e).with_context(&args.manifest))?;
    let options = CorrelationOptions {
        exclude_languages: args
            .exclude_languages
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>(),
        average_subscores: args.average_subscores,
        include_baseline: args.include_baseline,
    };
    let matrix = subword_stats::correlation_matrix(&manifest, &options)?;
    emit_formatted(
        &args.output,
        Format::Csv,
        || json::to_string(&matrix.to_json()),
        || matrix.to_csv(),
    )
}

fn prune(args: PruneArgs) -> Result<()> {
    let vocab = load_vocab_spec(
        args.vocab.as_deref(),
        args.model_id.as_deref(),
        &args.vocab_flags,
        &args.cache,
    )?;
    let corpus = load_nonempty_corpus(&args.corpus, "und")?;
    let config = tokenizer_config(&args.tokenizer);
    let pruned =
        vocabtools::prune_vocab_with_workers(&vocab, &corpus, &config, workers(args.workers))?;
    eprintln!("kept {} of {} tokens", pruned.len(), vocab.len());
    let mut out = Vec::new();
    pruned
        .write_to(&mut out)
        .map_err(|e| CliError::Io(e.to_string()))?;
    emit(
        args.output.as_deref(),
        &String::from_utf8(out).expect("vocab tokens are UTF-8"),
    )
}

fn remap(args: RemapArgs) -> Result<()> {
    let old = load_vocab_spec(
        args.vocab.as_deref(),
        args.model_id.as_deref(),
        &args.vocab_flags,
        &args.cache,
    )?;
    let new = load_vocab_spec(
        args.new_vocab.as_deref(),
        args.new_model_id.as_deref(),
        &args.vocab_flags,
        &args.cache,
    )?;
    let mode = match args.mode {
        ModeArg::Paper => RemapMode::Paper,
        ModeArg::SharedCopy => RemapMode::SharedCopy,
    };
    let plan = vocabtools::remap_plan(&old, &new, mode)?;
    emit_formatted(
        &args.output,
        Format::Json,
        || json::to_string(&plan.to_json()),
        || {
            let mut out = String::from("new_id,token,action,old_id\n");
            for e in &plan.entries {
                let (action, old_id) = match e.action {
                    RemapAction::CopyFrom(id) => ("copy", id.to_string()),
                    RemapAction::RandomInit => ("random_init", String::new()),
                };
                out.push_str(&format!(
                    "{},{},{action},{old_id}\n",
                    e.new_id,
                    csv_field(&e.token)
                ));
            }
            out
        },
    )
}

fn fetch(args: FetchArgs) -> Result<()> {
    let path = cache(&args.cache).fetch(&args.model_id)?;
    emit(None, &format!("{}\n", path.display()))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

impl CliError {
    fn with_context(self, path: &Path) -> CliError {
        let prefix = |m: String| format!("{}: {m}", path.display());
        match self {
            CliError::Parse(m) => CliError::Parse(prefix(m)),
            CliError::Io(m) => CliError::Io(prefix(m)),
            CliError::Network(m) => CliError::Network(prefix(m)),
        }
    }
}
