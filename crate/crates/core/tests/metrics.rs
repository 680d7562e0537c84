//! Deduplication keys and the per-target / benchmark metrics.

use std::collections::HashMap;

use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use chemcensor::metrics::{
    aggregate, av_pt_max_cc, av_pt_top_k, cc_at_k, dedup_key, max_cc, unique_fraction, TargetRecord, INVALID_KEY,
};
use chemcensor::{parse_smiles, randomize_traversal};

mod common;
use common::stub_result;

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

/// A record whose unique predictions (in order) score `scores`, padded with
/// copies of the first prediction up to `n_samples`.
fn record(scores: &[u8], n_samples: usize) -> TargetRecord {
    let keys: Vec<String> = (0..scores.len()).map(|i| "C".repeat(i + 1)).collect();
    let by_key: HashMap<String, u8> = keys.iter().cloned().zip(scores.iter().copied()).collect();
    let mut samples: Vec<Option<String>> = keys.iter().cloned().map(Some).collect();
    while samples.len() < n_samples {
        samples.push(keys.first().cloned());
    }
    TargetRecord::build("T", "CC", samples, n_samples, |k| stub_result(by_key[k]))
}

#[test]
fn dedup_keys() {
    assert_eq!(dedup_key("CCO.CC(=O)O"), dedup_key("CC(=O)O.OCC"));
    assert_eq!(dedup_key("C("), INVALID_KEY);
    assert_eq!(dedup_key(""), INVALID_KEY);

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let parts = ["CC(=O)Cl", "NCc1ccccc1"];
    let mols: Vec<_> = parts.iter().map(|p| parse_smiles(p).unwrap()).collect();
    let variants: Vec<String> = (0..15u64)
        .map(|i| {
            let mut v: Vec<String> = mols.iter().map(|m| randomize_traversal(m, i * 31 + 7)).collect();
            v.shuffle(&mut rng);
            v.join(".")
        })
        .collect();
    let mut distinct_text = variants.clone();
    distinct_text.sort();
    distinct_text.dedup();
    assert!(distinct_text.len() > 5);
    let mut keys: Vec<String> = variants.iter().map(|v| dedup_key(v)).collect();
    keys.dedup();
    assert_eq!(keys.len(), 1, "{variants:?}");
}

#[test]
fn max_cc_examples() {
    assert_eq!(max_cc(&record(&[3, 0, 5], 3)), 5);
    assert_eq!(max_cc(&record(&[], 15)), 0);
    let invalid = TargetRecord::build("T", "CC", vec![Some("C(".into()); 15], 15, |_| unreachable!());
    assert_eq!(max_cc(&invalid), 0);
    assert_eq!(invalid.histogram().invalid_input, 15);
}

#[test]
fn averages() {
    let maxes: Vec<TargetRecord> = [5u8, 3, 0, 0].iter().map(|&m| record(&[m], 1)).collect();
    assert_eq!(av_pt_max_cc(&maxes).unwrap(), r(2, 1));
    assert_eq!(av_pt_max_cc(&[record(&[5], 1)]).unwrap(), r(5, 1));
    assert!(av_pt_max_cc(&[]).is_err());

    let pair = [record(&[5, 3], 2), record(&[], 0)];
    assert_eq!(cc_at_k(&pair[0], 3), r(8, 3));
    assert_eq!(av_pt_top_k(&[record(&[5, 3, 0], 3), record(&[], 0)], 5).unwrap(), r(4, 5));
    let all_five: Vec<TargetRecord> = (0..4).map(|_| record(&[5; 6], 6)).collect();
    assert_eq!(av_pt_top_k(&all_five, 5).unwrap(), r(5, 1));
}

#[test]
fn cc_at_k_examples() {
    assert_eq!(cc_at_k(&record(&[5, 3], 2), 5), r(8, 5));
    for k in [1, 3, 5, 10] {
        assert_eq!(cc_at_k(&record(&[], 15), k), r(0, 1));
    }
    let padded = record(&[5, 5, 5], 15);
    assert_eq!(padded.n_unique_valid, 3);
    assert_eq!(padded.histogram().duplicate, 12);
    assert_eq!(cc_at_k(&padded, 3), r(5, 1));
}

#[test]
#[should_panic]
fn cc_at_zero_panics() {
    cc_at_k(&record(&[5], 1), 0);
}

#[test]
fn unique_fraction_examples() {
    assert_eq!(unique_fraction(&[record(&[1, 2, 3, 4, 5, 0, 1, 2, 3], 15)]), r(3, 5));
    let invalid = TargetRecord::build("T", "CC", vec![None; 15], 15, |_| unreachable!());
    assert_eq!(unique_fraction(std::slice::from_ref(&invalid)), r(0, 1));
    let agg = aggregate(&[invalid], &[3, 5, 10]).unwrap();
    assert_eq!(agg.category_totals.empty, 15);
    assert_eq!(agg.av_pt_top_k.keys().copied().collect::<Vec<_>>(), vec![3, 5, 10]);
}
