//! Report rendering: a full JSON document plus summary, category and
//! FG-error tables. Output depends only on the report contents.

use std::path::{Path, PathBuf};

use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

use super::{BenchmarkReport, HarnessError, ModelReport};
use crate::metrics::{cc_at_k, max_cc, SampleOutcome, TargetRecord};
use crate::scorer::{CategoryHistogram, CcResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReportFormat {
    Json,
    Tsv,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "tsv" => Ok(ReportFormat::Tsv),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown report format '{other}' (expected json, tsv or csv)")),
        }
    }
}

fn rational(r: Rational64) -> Value {
    json!({ "exact": format!("{}/{}", r.numer(), r.denom()), "value": r.to_f64().unwrap_or(0.0) })
}

fn histogram_json(h: &CategoryHistogram) -> Value {
    serde_json::to_value(h).expect("histogram serializes")
}

fn result_json(key: &str, r: &CcResult, fg_names: &[String]) -> Value {
    json!({
        "prediction": key,
        "score": r.score,
        "category": r.category.as_str(),
        "matched_level": r.matched_level,
        "matched_key": r.matched_key,
        "violating_fgs": r.violating_fgs.iter().map(|&i| json!({"id": i, "name": fg_names[i]})).collect::<Vec<_>>(),
        "doc_refs": r.doc_refs,
        "detail": r.detail,
    })
}

fn outcome_str(o: &SampleOutcome) -> &'static str {
    match o {
        SampleOutcome::Empty => "EMPTY",
        SampleOutcome::Invalid => "INVALID",
        SampleOutcome::Duplicate(_) => "DUPLICATE",
        SampleOutcome::Unique(_) => "UNIQUE",
    }
}

fn target_json(rec: &TargetRecord, k_list: &[usize], fg_names: &[String]) -> Value {
    let cc: Map<String, Value> = k_list.iter().map(|&k| (k.to_string(), rational(cc_at_k(rec, k)))).collect();
    let samples: Vec<Value> = rec
        .outcomes
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let extracted = rec.samples.get(i).cloned().flatten();
            let mut v = json!({ "extracted": extracted, "outcome": outcome_str(o) });
            if let SampleOutcome::Unique(u) | SampleOutcome::Duplicate(u) = o {
                v["prediction_index"] = json!(u);
            }
            v
        })
        .collect();
    json!({
        "target_id": rec.target_id,
        "target_smiles": rec.target_smiles,
        "n_samples": rec.n_samples,
        "n_valid": rec.n_valid,
        "n_unique_valid": rec.n_unique_valid,
        "max_cc": max_cc(rec),
        "cc_at_k": cc,
        "categories": histogram_json(&rec.histogram()),
        "predictions": rec.unique_predictions.iter().map(|(k, r)| result_json(k, r, fg_names)).collect::<Vec<_>>(),
        "samples": samples,
    })
}

fn model_json(m: &ModelReport, k_list: &[usize], fg_names: &[String]) -> Value {
    let a = &m.aggregate;
    let top: Map<String, Value> = a.av_pt_top_k.iter().map(|(k, v)| (k.to_string(), rational(*v))).collect();
    json!({
        "model_id": m.model_id,
        "aggregate": {
            "n_targets": a.n_targets,
            "av_pt_max_cc": rational(a.av_pt_max_cc),
            "av_pt_top_k": top,
            "unique_fraction": rational(a.unique_fraction),
            "unique_fraction_macro": rational(a.unique_fraction_macro),
            "categories": histogram_json(&a.category_totals),
        },
        "targets": m.records.iter().map(|r| target_json(r, k_list, fg_names)).collect::<Vec<_>>(),
    })
}

/// The full report as a JSON document.
pub fn report_json(report: &BenchmarkReport) -> Value {
    let k_list = &report.config.k_list;
    json!({
        "config": serde_json::to_value(&report.config).expect("config serializes"),
        "issues": report.issues,
        "models": report.models.iter().map(|m| model_json(m, k_list, &report.fg_names)).collect::<Vec<_>>(),
        "fg_error_matrix": {
            "models": report.models.iter().map(|m| m.model_id.clone()).collect::<Vec<_>>(),
            "fg_names": report.fg_names,
            "counts": report.fg_error_matrix(),
        },
    })
}

fn table(delimiter: u8, header: Vec<String>, rows: Vec<Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(Vec::new());
    w.write_record(&header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8 fields")
}

fn malformed(what: &str) -> HarnessError {
    HarnessError::Config(format!("report document is missing or has a malformed '{what}'"))
}

fn field<'v>(v: &'v Value, path: &str) -> Result<&'v Value, HarnessError> {
    v.pointer(path).ok_or_else(|| malformed(path))
}

fn array<'v>(v: &'v Value, path: &str) -> Result<&'v Vec<Value>, HarnessError> {
    field(v, path)?.as_array().ok_or_else(|| malformed(path))
}

fn text(v: &Value, path: &str) -> Result<String, HarnessError> {
    let f = field(v, path)?;
    match f {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(malformed(path)),
    }
}

fn ratio(v: &Value, path: &str) -> Result<String, HarnessError> {
    let x = field(v, &format!("{path}/value"))?.as_f64().ok_or_else(|| malformed(path))?;
    Ok(format!("{x:.4}"))
}

fn k_list(doc: &Value) -> Result<Vec<String>, HarnessError> {
    array(doc, "/config/k_list")?.iter().map(|k| k.as_u64().map(|k| k.to_string()).ok_or_else(|| malformed("k_list"))).collect()
}

fn category_cells(v: &Value, path: &str) -> Result<Vec<String>, HarnessError> {
    CategoryHistogram::COLUMNS.iter().map(|c| text(v, &format!("{path}/{c}"))).collect()
}

fn summary_table(doc: &Value, delimiter: u8) -> Result<String, HarnessError> {
    let ks = k_list(doc)?;
    let mut header: Vec<String> =
        ["model", "targets", "unique", "unique_macro", "av_pt_max_cc"].iter().map(|s| s.to_string()).collect();
    header.extend(ks.iter().map(|k| format!("av_pt_top_{k}_cc")));
    let mut rows = Vec::new();
    for m in array(doc, "/models")? {
        let mut row = vec![
            text(m, "/model_id")?,
            text(m, "/aggregate/n_targets")?,
            ratio(m, "/aggregate/unique_fraction")?,
            ratio(m, "/aggregate/unique_fraction_macro")?,
            ratio(m, "/aggregate/av_pt_max_cc")?,
        ];
        for k in &ks {
            row.push(ratio(m, &format!("/aggregate/av_pt_top_k/{k}"))?);
        }
        rows.push(row);
    }
    Ok(table(delimiter, header, rows))
}

fn categories_table(doc: &Value, delimiter: u8) -> Result<String, HarnessError> {
    let mut header = vec!["model".to_string()];
    header.extend(CategoryHistogram::COLUMNS.iter().map(|s| s.to_string()));
    header.push("total".into());
    let mut rows = Vec::new();
    for m in array(doc, "/models")? {
        let cells = category_cells(m, "/aggregate/categories")?;
        let total: u64 = cells.iter().map(|c| c.parse::<u64>().unwrap_or(0)).sum();
        let mut row = vec![text(m, "/model_id")?];
        row.extend(cells);
        row.push(total.to_string());
        rows.push(row);
    }
    Ok(table(delimiter, header, rows))
}

fn fg_matrix_table(doc: &Value, delimiter: u8) -> Result<String, HarnessError> {
    let models = array(doc, "/fg_error_matrix/models")?;
    let names = array(doc, "/fg_error_matrix/fg_names")?;
    let counts = array(doc, "/fg_error_matrix/counts")?;
    let mut header = vec!["fg_id".to_string(), "fg_name".to_string()];
    for m in models {
        header.push(m.as_str().ok_or_else(|| malformed("fg_error_matrix/models"))?.to_string());
    }
    let mut rows = Vec::new();
    for (id, name) in names.iter().enumerate() {
        let mut row = vec![id.to_string(), name.as_str().ok_or_else(|| malformed("fg_names"))?.to_string()];
        for (mi, _) in models.iter().enumerate() {
            row.push(text(&counts[mi], &format!("/{id}"))?);
        }
        rows.push(row);
    }
    Ok(table(delimiter, header, rows))
}

fn targets_table(doc: &Value, delimiter: u8) -> Result<String, HarnessError> {
    let ks = k_list(doc)?;
    let mut header: Vec<String> =
        ["model", "target_id", "samples", "valid", "unique_valid", "max_cc"].iter().map(|s| s.to_string()).collect();
    header.extend(ks.iter().map(|k| format!("cc_at_{k}")));
    header.extend(CategoryHistogram::COLUMNS.iter().map(|s| s.to_string()));
    let mut rows = Vec::new();
    for m in array(doc, "/models")? {
        let model = text(m, "/model_id")?;
        for t in array(m, "/targets")? {
            let mut row = vec![
                model.clone(),
                text(t, "/target_id")?,
                text(t, "/n_samples")?,
                text(t, "/n_valid")?,
                text(t, "/n_unique_valid")?,
                text(t, "/max_cc")?,
            ];
            for k in &ks {
                row.push(ratio(t, &format!("/cc_at_k/{k}"))?);
            }
            row.extend(category_cells(t, "/categories")?);
            rows.push(row);
        }
    }
    Ok(table(delimiter, header, rows))
}

/// Renders a report document (as produced by [`report_json`]) in the
/// requested formats as (file name, contents), in a fixed order.
pub fn render_document(doc: &Value, formats: &[ReportFormat]) -> Result<Vec<(String, String)>, HarnessError> {
    let mut files = Vec::new();
    let mut seen = Vec::new();
    for &f in formats {
        if seen.contains(&f) {
            continue;
        }
        seen.push(f);
        match f {
            ReportFormat::Json => {
                let mut s = serde_json::to_string_pretty(doc).expect("JSON values serialize");
                s.push('\n');
                files.push(("report.json".to_string(), s));
            }
            ReportFormat::Tsv | ReportFormat::Csv => {
                let (ext, d) = if f == ReportFormat::Tsv { ("tsv", b'\t') } else { ("csv", b',') };
                files.push((format!("summary.{ext}"), summary_table(doc, d)?));
                files.push((format!("categories.{ext}"), categories_table(doc, d)?));
                files.push((format!("fg_matrix.{ext}"), fg_matrix_table(doc, d)?));
                files.push((format!("targets.{ext}"), targets_table(doc, d)?));
            }
        }
    }
    Ok(files)
}

/// Renders every requested format as (file name, contents).
pub fn render_report(report: &BenchmarkReport, formats: &[ReportFormat]) -> Vec<(String, String)> {
    render_document(&report_json(report), formats).expect("documents built from reports are well formed")
}

/// Writes files into `dir` (created if missing).
pub fn write_files(files: &[(String, String)], dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (name, contents) in files {
        let path = dir.join(name);
        std::fs::write(&path, contents)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Writes the rendered report into `dir`.
pub fn emit_report(report: &BenchmarkReport, dir: &Path, formats: &[ReportFormat]) -> Result<Vec<PathBuf>, HarnessError> {
    write_files(&render_report(report, formats), dir)
}
