//! Benchmark harness: prompts, completion files, answer extraction,
//! scoring and aggregation into a report.

mod client;
mod extract;
mod prompt;
mod report;

use std::collections::{BTreeMap, HashMap};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{aggregate, BenchmarkAggregate, MetricsError, TargetRecord, DEFAULT_K_LIST};
use crate::scorer::{Category, Scorer, ScorerError};

pub use client::{query_model, EndpointConfig, SampleResult, DEFAULT_API_KEY_ENV};
pub use extract::extract_answer;
pub use prompt::{build_prompt, render_template, templates, wrap_smiles, FewShotExample, PromptSpec, FEWSHOT_COUNT};
pub use report::{emit_report, render_document, render_report, report_json, write_files, ReportFormat};

pub const DEFAULT_SAMPLES: usize = 15;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("few-shot pool has {have} examples, at least {need} are needed")]
    PoolTooSmall { have: usize, need: usize },
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Scorer(#[from] ScorerError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Target {
    pub id: String,
    pub smiles: String,
}

/// Reads `id<delim>smiles` records; blank lines, `#` comments and a leading
/// header row are skipped.
pub fn read_targets(text: &str, delimiter: char) -> Result<Vec<Target>, HarnessError> {
    let mut out: Vec<Target> = Vec::new();
    let mut seen = HashMap::new();
    let mut first = true;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(delimiter).map(|f| f.trim().trim_matches('"'));
        let (Some(id), Some(smiles)) = (fields.next(), fields.next()) else {
            return Err(HarnessError::Format { line: i + 1, msg: format!("expected 'id{delimiter}smiles'") });
        };
        if std::mem::take(&mut first) && smiles.eq_ignore_ascii_case("smiles") {
            continue;
        }
        if id.is_empty() || smiles.is_empty() {
            return Err(HarnessError::Format { line: i + 1, msg: "empty id or SMILES".into() });
        }
        if seen.insert(id.to_string(), i + 1).is_some() {
            return Err(HarnessError::Format { line: i + 1, msg: format!("duplicate target id '{id}'") });
        }
        out.push(Target { id: id.to_string(), smiles: smiles.to_string() });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
}

/// One line of a completions file. `null` samples mark failed requests.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionRecord {
    pub target_id: String,
    pub target_smiles: String,
    pub model_id: String,
    pub samples: Vec<Option<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

pub fn read_completions(text: &str) -> Result<Vec<CompletionRecord>, HarnessError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| HarnessError::Format { line: i + 1, msg: e.to_string() })
        })
        .collect()
}

pub fn write_completion_line(record: &CompletionRecord) -> String {
    let mut s = serde_json::to_string(record).expect("completion records always serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub k_list: Vec<usize>,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig { k_list: DEFAULT_K_LIST.to_vec(), n_samples: DEFAULT_SAMPLES, seed: 0 }
    }
}

/// Knowledge-base and library identity echoed into reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunEcho {
    pub k_list: Vec<usize>,
    pub n_samples: usize,
    pub seed: u64,
    pub library_digest: String,
    pub library_size: usize,
    pub kb_source: String,
    pub kb_reactions: u64,
}

#[derive(Debug, Clone)]
pub struct ModelReport {
    pub model_id: String,
    pub records: Vec<TargetRecord>,
    pub aggregate: BenchmarkAggregate,
    /// FG_INCOMPATIBLE mentions per library id.
    pub fg_errors: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct BenchmarkReport {
    pub config: RunEcho,
    pub models: Vec<ModelReport>,
    pub fg_names: Vec<String>,
    /// Coverage gaps and other non-fatal problems, in a stable order.
    pub issues: Vec<String>,
}

impl BenchmarkReport {
    /// Rows are models, columns library ids.
    pub fn fg_error_matrix(&self) -> Vec<Vec<usize>> {
        self.models.iter().map(|m| m.fg_errors.clone()).collect()
    }
}

/// Extract, deduplicate and score every sample, then aggregate per model.
pub fn run_benchmark(
    targets: &[Target],
    completions: &[CompletionRecord],
    scorer: &Scorer<'_>,
    config: &BenchConfig,
) -> Result<BenchmarkReport, HarnessError> {
    if targets.is_empty() {
        return Err(MetricsError::EmptyBenchmark.into());
    }
    if config.k_list.is_empty() || config.k_list.contains(&0) {
        return Err(HarnessError::Config("K values must be positive".into()));
    }
    let mut issues = Vec::new();
    let known: HashMap<&str, &Target> = targets.iter().map(|t| (t.id.as_str(), t)).collect();
    let mut by_model: BTreeMap<&str, HashMap<&str, Vec<Option<String>>>> = BTreeMap::new();
    for rec in completions {
        let Some(target) = known.get(rec.target_id.as_str()) else {
            issues.push(format!("model {}: completions for unknown target '{}' ignored", rec.model_id, rec.target_id));
            continue;
        };
        if rec.target_smiles != target.smiles {
            issues.push(format!(
                "model {}: target '{}' SMILES differs from the targets file; the targets file wins",
                rec.model_id, rec.target_id
            ));
        }
        let slot = by_model.entry(rec.model_id.as_str()).or_default().entry(rec.target_id.as_str()).or_default();
        if !slot.is_empty() {
            issues.push(format!("model {}: target '{}' appears more than once; samples concatenated", rec.model_id, rec.target_id));
        }
        slot.extend(rec.samples.iter().cloned());
    }
    if by_model.is_empty() {
        return Err(HarnessError::Config("no completions match the target list".into()));
    }
    let library = scorer.library();
    let mut models = Vec::new();
    for (model_id, samples) in by_model {
        for t in targets {
            match samples.get(t.id.as_str()) {
                None => issues.push(format!("model {model_id}: no completions for target '{}'", t.id)),
                Some(s) if s.len() < config.n_samples => issues.push(format!(
                    "model {model_id}: target '{}' has {} of {} samples (incomplete)",
                    t.id,
                    s.len(),
                    config.n_samples
                )),
                Some(s) if s.len() > config.n_samples => issues.push(format!(
                    "model {model_id}: target '{}' has {} samples, more than the configured {}",
                    t.id,
                    s.len(),
                    config.n_samples
                )),
                _ => {}
            }
        }
        let records: Vec<TargetRecord> = targets
            .par_iter()
            .map(|t| {
                let raw = samples.get(t.id.as_str()).cloned().unwrap_or_default();
                let extracted: Vec<Option<String>> =
                    raw.iter().map(|s| s.as_deref().and_then(extract_answer)).collect();
                TargetRecord::build(&t.id, &t.smiles, extracted, config.n_samples, |key| {
                    scorer.score(&format!("{key}>>{}", t.smiles))
                })
            })
            .collect();
        let mut fg_errors = vec![0usize; library.len()];
        for rec in &records {
            for (_, r) in &rec.unique_predictions {
                if r.category == Category::FgIncompatible {
                    for &id in &r.violating_fgs {
                        fg_errors[id] += 1;
                    }
                }
            }
        }
        let agg = aggregate(&records, &config.k_list)?;
        models.push(ModelReport { model_id: model_id.to_string(), records, aggregate: agg, fg_errors });
    }
    for i in &issues {
        warn!("{i}");
    }
    let meta = scorer.kb().metadata();
    Ok(BenchmarkReport {
        config: RunEcho {
            k_list: config.k_list.clone(),
            n_samples: config.n_samples,
            seed: config.seed,
            library_digest: library.digest().to_string(),
            library_size: library.len(),
            kb_source: meta.source.clone(),
            kb_reactions: meta.reactions,
        },
        models,
        fg_names: library.definitions().iter().map(|d| d.name.clone()).collect(),
        issues,
    })
}
