//! Benchmark metrics over deduplicated, scored predictions: Max CC,
//! Av. PT-Max CC, CC@K, Av. PT-Top-K CC and the unique fraction.
//! All averages are exact rationals.

use std::collections::{BTreeMap, HashMap};

use num_rational::Rational64;
use num_traits::Zero;
use thiserror::Error;

use crate::chem::{canonical_smiles_unmapped, parse_smiles};
use crate::scorer::{CategoryHistogram, CcResult};

/// Dedup key given to predictions that do not parse.
pub const INVALID_KEY: &str = "<invalid>";

pub const DEFAULT_K_LIST: [usize; 3] = [3, 5, 10];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("benchmark has no targets")]
    EmptyBenchmark,
}

/// Sorted canonical components joined by `.`, or [`INVALID_KEY`].
pub fn dedup_key(prediction: &str) -> String {
    let text = prediction.trim();
    if text.is_empty() {
        return INVALID_KEY.to_string();
    }
    let Ok(mol) = parse_smiles(text) else {
        return INVALID_KEY.to_string();
    };
    if mol.atom_count() == 0 {
        return INVALID_KEY.to_string();
    }
    let mut parts: Vec<String> = mol
        .components()
        .iter()
        .map(|c| canonical_smiles_unmapped(&mol.induced(c)))
        .collect();
    parts.sort();
    parts.join(".")
}

/// What happened to one raw sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SampleOutcome {
    /// No answer could be extracted.
    Empty,
    /// Extracted text is not a valid reactant set.
    Invalid,
    /// Repeats the unique prediction at this index.
    Duplicate(usize),
    /// First occurrence; index into `unique_predictions`.
    Unique(usize),
}

#[derive(Debug, Clone)]
pub struct TargetRecord {
    pub target_id: String,
    pub target_smiles: String,
    /// Raw extracted predictions (`None` when extraction failed).
    pub samples: Vec<Option<String>>,
    /// Valid predictions in first-occurrence order.
    pub unique_predictions: Vec<(String, CcResult)>,
    pub outcomes: Vec<SampleOutcome>,
    pub n_samples: usize,
    pub n_valid: usize,
    pub n_unique_valid: usize,
}

impl TargetRecord {
    /// Deduplicates `samples` and scores each new valid prediction with `score`.
    ///
    /// `n_samples` is the configured sample count; samples missing from the
    /// run count as empty.
    pub fn build(
        target_id: &str,
        target_smiles: &str,
        samples: Vec<Option<String>>,
        n_samples: usize,
        mut score: impl FnMut(&str) -> CcResult,
    ) -> TargetRecord {
        let mut seen: HashMap<String, usize> = HashMap::new();
        let mut unique: Vec<(String, CcResult)> = Vec::new();
        let mut outcomes = Vec::with_capacity(samples.len().max(n_samples));
        let mut n_valid = 0;
        for sample in &samples {
            let outcome = match sample {
                None => SampleOutcome::Empty,
                Some(text) => {
                    let key = dedup_key(text);
                    if key == INVALID_KEY {
                        SampleOutcome::Invalid
                    } else {
                        n_valid += 1;
                        match seen.get(&key) {
                            Some(&i) => SampleOutcome::Duplicate(i),
                            None => {
                                let result = score(&key);
                                seen.insert(key.clone(), unique.len());
                                unique.push((key, result));
                                SampleOutcome::Unique(unique.len() - 1)
                            }
                        }
                    }
                }
            };
            outcomes.push(outcome);
        }
        while outcomes.len() < n_samples {
            outcomes.push(SampleOutcome::Empty);
        }
        TargetRecord {
            target_id: target_id.to_string(),
            target_smiles: target_smiles.to_string(),
            n_samples: n_samples.max(samples.len()),
            samples,
            n_unique_valid: unique.len(),
            unique_predictions: unique,
            outcomes,
            n_valid,
        }
    }

    pub fn scores(&self) -> impl Iterator<Item = u8> + '_ {
        self.unique_predictions.iter().map(|(_, r)| r.score)
    }

    /// Category counts over all samples; partitions `n_samples`.
    pub fn histogram(&self) -> CategoryHistogram {
        let mut h = CategoryHistogram::default();
        for o in &self.outcomes {
            match o {
                SampleOutcome::Empty => h.empty += 1,
                SampleOutcome::Invalid => h.invalid_input += 1,
                SampleOutcome::Duplicate(_) => h.duplicate += 1,
                SampleOutcome::Unique(i) => h.record(self.unique_predictions[*i].1.category),
            }
        }
        h
    }
}

pub fn max_cc(record: &TargetRecord) -> u8 {
    record.scores().max().unwrap_or(0)
}

pub fn av_pt_max_cc(records: &[TargetRecord]) -> Result<Rational64, MetricsError> {
    mean(records.iter().map(|r| Rational64::from_integer(max_cc(r) as i64)), records.len())
}

/// Mean of the first `k` unique scores, zero-padded to `k` slots.
///
/// # Panics
/// If `k` is zero.
pub fn cc_at_k(record: &TargetRecord, k: usize) -> Rational64 {
    assert!(k >= 1, "K must be at least 1");
    let sum: i64 = record.scores().take(k).map(i64::from).sum();
    Rational64::new(sum, k as i64)
}

pub fn av_pt_top_k(records: &[TargetRecord], k: usize) -> Result<Rational64, MetricsError> {
    mean(records.iter().map(|r| cc_at_k(r, k)), records.len())
}

/// Pooled: total unique valid predictions over total samples.
pub fn unique_fraction(records: &[TargetRecord]) -> Rational64 {
    let samples: usize = records.iter().map(|r| r.n_samples).sum();
    if samples == 0 {
        return Rational64::zero();
    }
    let unique: usize = records.iter().map(|r| r.n_unique_valid).sum();
    Rational64::new(unique as i64, samples as i64)
}

/// Per-target unique fraction, averaged over targets.
pub fn unique_fraction_macro(records: &[TargetRecord]) -> Rational64 {
    let per_target = records.iter().map(|r| {
        if r.n_samples == 0 {
            Rational64::zero()
        } else {
            Rational64::new(r.n_unique_valid as i64, r.n_samples as i64)
        }
    });
    mean(per_target, records.len()).unwrap_or_else(|_| Rational64::zero())
}

fn mean(values: impl Iterator<Item = Rational64>, n: usize) -> Result<Rational64, MetricsError> {
    if n == 0 {
        return Err(MetricsError::EmptyBenchmark);
    }
    let total = values.fold(Rational64::zero(), |acc, v| acc + v);
    Ok(total / Rational64::from_integer(n as i64))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchmarkAggregate {
    pub n_targets: usize,
    pub av_pt_max_cc: Rational64,
    pub av_pt_top_k: BTreeMap<usize, Rational64>,
    pub unique_fraction: Rational64,
    pub unique_fraction_macro: Rational64,
    pub category_totals: CategoryHistogram,
}

pub fn aggregate(records: &[TargetRecord], k_list: &[usize]) -> Result<BenchmarkAggregate, MetricsError> {
    let mut totals = CategoryHistogram::default();
    for r in records {
        totals += r.histogram();
    }
    Ok(BenchmarkAggregate {
        n_targets: records.len(),
        av_pt_max_cc: av_pt_max_cc(records)?,
        av_pt_top_k: k_list.iter().map(|&k| Ok((k, av_pt_top_k(records, k)?))).collect::<Result<_, _>>()?,
        unique_fraction: unique_fraction(records),
        unique_fraction_macro: unique_fraction_macro(records),
        category_totals: totals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scorer::Category;

    fn result(score: u8) -> CcResult {
        CcResult {
            score,
            category: if score > 0 { Category::Pass } else { Category::NoRcPrecedent },
            matched_level: score,
            matched_key: None,
            violating_fgs: Vec::new(),
            doc_refs: Vec::new(),
            detail: String::new(),
            mapped_reaction: None,
            keys: Vec::new(),
        }
    }

    fn record(samples: &[&str], scores: &[(&str, u8)]) -> TargetRecord {
        let table: HashMap<String, u8> = scores.iter().map(|(s, v)| (dedup_key(s), *v)).collect();
        TargetRecord::build(
            "t",
            "CC",
            samples.iter().map(|s| Some(s.to_string())).collect(),
            samples.len(),
            |k| result(table[k]),
        )
    }

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn dedup_keys() {
        assert_eq!(dedup_key("CCO.CC(=O)O"), dedup_key("CC(=O)O.OCC"));
        assert_eq!(dedup_key("C("), INVALID_KEY);
        assert_eq!(dedup_key(""), INVALID_KEY);
    }

    #[test]
    fn worked_cc_at_5() {
        let rec = record(&["CCO", "CBr"], &[("CCO", 5), ("CBr", 3)]);
        assert_eq!(cc_at_k(&rec, 5), r(8, 5));
        let dup = record(&["CCO", "CBr", "OCC", "CBr", "BrC"], &[("CCO", 5), ("CBr", 3)]);
        assert_eq!(cc_at_k(&dup, 5), r(8, 5));
        assert_eq!(max_cc(&dup), 5);
    }

    #[test]
    fn duplicates_cannot_inflate() {
        let mut samples = vec!["C", "CC", "CCC"];
        samples.extend(std::iter::repeat_n("C", 12));
        let rec = record(&samples, &[("C", 5), ("CC", 5), ("CCC", 5)]);
        assert_eq!(cc_at_k(&rec, 3), r(5, 1));
        assert_eq!(rec.n_unique_valid, 3);
        assert_eq!(unique_fraction(&[rec]), r(1, 5));
    }

    #[test]
    fn averages() {
        let maxes = [5u8, 3, 0, 0];
        let recs: Vec<TargetRecord> = maxes
            .iter()
            .map(|&m| if m == 0 { record(&["C("], &[]) } else { record(&["C"], &[("C", m)]) })
            .collect();
        assert_eq!(av_pt_max_cc(&recs).unwrap(), r(2, 1));
        assert_eq!(av_pt_max_cc(&[]), Err(MetricsError::EmptyBenchmark));
        let a = record(&["C", "CC"], &[("C", 5), ("CC", 3)]);
        let b = record(&["C("], &[]);
        assert_eq!(cc_at_k(&a, 3), r(8, 3));
        assert_eq!(av_pt_top_k(&[a, b], 3).unwrap(), r(4, 3));
    }

    #[test]
    fn empty_and_invalid() {
        let rec = TargetRecord::build("t", "C", vec![None, Some("C(".into())], 15, |_| unreachable!());
        assert_eq!(max_cc(&rec), 0);
        assert_eq!(cc_at_k(&rec, 10), r(0, 1));
        let h = rec.histogram();
        assert_eq!((h.empty, h.invalid_input, h.total()), (14, 1, 15));
        assert_eq!(unique_fraction(&[rec]), r(0, 1));
    }
}
