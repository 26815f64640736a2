//! Rank correlation between relative tokenizer-metric changes and relative
//! downstream-score changes, both measured against a multilingual baseline.

mod spearman;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Read;

use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::json::{fixed, format_fixed};

pub use spearman::{average_ranks, spearman};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("at least 2 paired values are required, got {0}")]
    TooFewPoints(usize),
    #[error("a series is constant; rank correlation is undefined")]
    ConstantSeries,
    #[error("series contains a non-finite value")]
    NonFinite,
    #[error("baseline value is zero; relative change is undefined")]
    ZeroBaseline,
    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error("manifest is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Larger is better: `(model - baseline) / baseline`.
    Increase,
    /// Smaller is better: `(baseline - model) / baseline`.
    Decrease,
}

/// Baseline-normalized difference, signed so that positive always means
/// an improvement in the given orientation.
pub fn relative_change(
    model: f64,
    baseline: f64,
    orientation: Orientation,
) -> Result<f64, AnalysisError> {
    if baseline == 0.0 {
        return Err(AnalysisError::ZeroBaseline);
    }
    if !model.is_finite() || !baseline.is_finite() {
        return Err(AnalysisError::NonFinite);
    }
    Ok(match orientation {
        Orientation::Increase => (model - baseline) / baseline,
        Orientation::Decrease => (baseline - model) / baseline,
    })
}

pub const METRIC_FERTILITY: &str = "fertility";
pub const METRIC_CONTINUATION: &str = "continuation_proportion";
const KNOWN_METRICS: [&str; 2] = [METRIC_CONTINUATION, METRIC_FERTILITY];

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRecord {
    pub language: String,
    pub model: String,
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
    #[serde(default)]
    pub scores: BTreeMap<String, f64>,
    #[serde(default)]
    pub corpus_words: Option<f64>,
}

/// Per-language metric and score records, including one record per
/// language for the baseline model.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub baseline_model: String,
    pub tasks: Vec<String>,
    pub records: Vec<ManifestRecord>,
}

impl Manifest {
    pub fn from_reader<R: Read>(reader: R) -> Result<Self, AnalysisError> {
        let manifest: Manifest = serde_json::from_reader(reader)?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn from_json_str(text: &str) -> Result<Self, AnalysisError> {
        let manifest: Manifest = serde_json::from_str(text)?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        let bad = |msg: String| Err(AnalysisError::Manifest(msg));
        let tasks: BTreeSet<&str> = self.tasks.iter().map(String::as_str).collect();
        if tasks.len() != self.tasks.len() {
            return bad("duplicate task name".into());
        }
        let mut seen = BTreeSet::new();
        let mut baselines = BTreeSet::new();
        for r in &self.records {
            if !seen.insert((r.language.as_str(), r.model.as_str())) {
                return bad(format!("duplicate record {}/{}", r.language, r.model));
            }
            if r.model == self.baseline_model {
                baselines.insert(r.language.as_str());
            }
            if let Some(name) = r
                .metrics
                .keys()
                .find(|m| !KNOWN_METRICS.contains(&m.as_str()))
            {
                return bad(format!(
                    "{}/{}: unknown metric {name:?}",
                    r.language, r.model
                ));
            }
            if let Some(name) = r.scores.keys().find(|t| !tasks.contains(t.as_str())) {
                return bad(format!(
                    "{}/{}: undeclared task {name:?}",
                    r.language, r.model
                ));
            }
        }
        if let Some(r) = self
            .records
            .iter()
            .find(|r| !baselines.contains(r.language.as_str()))
        {
            return bad(format!(
                "language {:?} has no {:?} baseline record",
                r.language, self.baseline_model
            ));
        }
        Ok(())
    }

    fn baseline(&self, language: &str) -> &ManifestRecord {
        self.records
            .iter()
            .find(|r| r.language == language && r.model == self.baseline_model)
            .expect("validated manifest has a baseline per language")
    }
}

/// The explanatory variables correlated against downstream scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Factor {
    ContinuationDecrease,
    FertilityDecrease,
    CorpusSizeIncrease,
}

impl Factor {
    pub const ALL: [Factor; 3] = [
        Factor::ContinuationDecrease,
        Factor::FertilityDecrease,
        Factor::CorpusSizeIncrease,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Factor::ContinuationDecrease => "continuation_proportion_decrease",
            Factor::FertilityDecrease => "fertility_decrease",
            Factor::CorpusSizeIncrease => "corpus_size_increase",
        }
    }

    fn value(self, record: &ManifestRecord) -> Option<f64> {
        match self {
            Factor::ContinuationDecrease => record.metrics.get(METRIC_CONTINUATION).copied(),
            Factor::FertilityDecrease => record.metrics.get(METRIC_FERTILITY).copied(),
            Factor::CorpusSizeIncrease => record.corpus_words,
        }
    }

    fn orientation(self) -> Orientation {
        match self {
            Factor::CorpusSizeIncrease => Orientation::Increase,
            _ => Orientation::Decrease,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorrelationOptions {
    /// Languages left out entirely (outlier exclusion).
    pub exclude_languages: BTreeSet<String>,
    /// Pool `TASK/SUB` columns into one `TASK` column by averaging the
    /// sub-measure scores of each record.
    pub average_subscores: bool,
    /// Also use the baseline records themselves, which contribute a
    /// zero-change point per language.
    pub include_baseline: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    /// `None` when fewer than two usable pairs exist or a series is constant.
    pub rho: Option<f64>,
    pub sample_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub factors: Vec<String>,
    pub tasks: Vec<String>,
    /// `cells[factor][task]`.
    pub cells: Vec<Vec<Cell>>,
}

impl CorrelationMatrix {
    pub fn cell(&self, factor: &str, task: &str) -> Option<&Cell> {
        let f = self.factors.iter().position(|x| x == factor)?;
        let t = self.tasks.iter().position(|x| x == task)?;
        Some(&self.cells[f][t])
    }

    /// Header row of task names; absent cells are empty fields.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("factor");
        for task in &self.tasks {
            out.push(',');
            out.push_str(&csv_field(task));
        }
        out.push('\n');
        for (factor, row) in self.factors.iter().zip(&self.cells) {
            out.push_str(&csv_field(factor));
            for cell in row {
                out.push(',');
                if let Some(rho) = cell.rho {
                    let _ = write!(out, "{}", format_fixed(rho));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let mut cells = Vec::new();
        for (factor, row) in self.factors.iter().zip(&self.cells) {
            for (task, cell) in self.tasks.iter().zip(row) {
                cells.push(json!({
                    "factor": factor,
                    "task": task,
                    "rho": cell.rho.map_or(Value::Null, fixed),
                    "sample_size": cell.sample_size,
                }));
            }
        }
        json!({ "factors": self.factors, "tasks": self.tasks, "cells": cells })
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Task columns after optional pooling, with the raw task names each
/// column draws from.
fn task_columns(manifest: &Manifest, average_subscores: bool) -> Vec<(String, Vec<String>)> {
    if !average_subscores {
        return manifest
            .tasks
            .iter()
            .map(|t| (t.clone(), vec![t.clone()]))
            .collect();
    }
    let mut columns: Vec<(String, Vec<String>)> = Vec::new();
    for task in &manifest.tasks {
        let group = task.split_once('/').map_or(task.as_str(), |(g, _)| g);
        match columns.iter_mut().find(|(name, _)| name == group) {
            Some((_, members)) => members.push(task.clone()),
            None => columns.push((group.to_owned(), vec![task.clone()])),
        }
    }
    columns
}

/// Mean of the member scores; absent unless every member is present.
fn column_score(record: &ManifestRecord, members: &[String]) -> Option<f64> {
    let mut sum = 0.0;
    for m in members {
        sum += record.scores.get(m)?;
    }
    Some(sum / members.len() as f64)
}

/// Spearman correlation for every (factor, task) pair over the records'
/// relative changes against the baseline of their language.
pub fn correlation_matrix(
    manifest: &Manifest,
    options: &CorrelationOptions,
) -> Result<CorrelationMatrix, AnalysisError> {
    manifest.validate()?;
    let columns = task_columns(manifest, options.average_subscores);

    let mut records: Vec<&ManifestRecord> = manifest
        .records
        .iter()
        .filter(|r| !options.exclude_languages.contains(&r.language))
        .filter(|r| options.include_baseline || r.model != manifest.baseline_model)
        .collect();
    records.sort_by(|a, b| (&a.language, &a.model).cmp(&(&b.language, &b.model)));

    let mut cells = Vec::with_capacity(Factor::ALL.len());
    for factor in Factor::ALL {
        let mut row = Vec::with_capacity(columns.len());
        for (_, members) in &columns {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for record in &records {
                let baseline = manifest.baseline(&record.language);
                let (Some(fx), Some(fb)) = (factor.value(record), factor.value(baseline)) else {
                    continue;
                };
                let (Some(sx), Some(sb)) = (
                    column_score(record, members),
                    column_score(baseline, members),
                ) else {
                    continue;
                };
                xs.push(relative_change(fx, fb, factor.orientation())?);
                ys.push(relative_change(sx, sb, Orientation::Increase)?);
            }
            let rho = match spearman(&xs, &ys) {
                Ok(rho) => Some(rho),
                Err(AnalysisError::TooFewPoints(_)) | Err(AnalysisError::ConstantSeries) => None,
                Err(e) => return Err(e),
            };
            row.push(Cell {
                rho,
                sample_size: xs.len(),
            });
        }
        cells.push(row);
    }

    Ok(CorrelationMatrix {
        factors: Factor::ALL.iter().map(|f| f.name().to_owned()).collect(),
        tasks: columns.into_iter().map(|(name, _)| name).collect(),
        cells,
    })
}
