//! Acceptance criteria. A single test runs every check in sequence (so the
//! timing checks are not disturbed by parallel tests), prints one PASS/FAIL
//! line per criterion, and fails if any criterion fails.

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use chemcensor::harness::{read_completions, read_targets, run_benchmark, BenchConfig, BenchmarkReport};
use chemcensor::kb::{build_kb, merge_kb, read_corpus, BuildOptions, CorpusRecord, KnowledgeBase};
use chemcensor::metrics::{av_pt_max_cc, av_pt_top_k, cc_at_k, max_cc, SampleOutcome, TargetRecord};
use chemcensor::reaction::{analyze_reaction, parse_reaction, FgLibrary, LEVELS};
use chemcensor::scorer::{CategoryHistogram, Scorer};
use chemcensor::synth::{generate_corpus, permute_reaction};
use chemcensor::{match_pattern, parse_smarts, parse_smiles};

mod common;
use common::{brute_force_matches, stub_result};

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden")
}

fn opts() -> BuildOptions {
    BuildOptions { built: Some(0), ..BuildOptions::default() }
}

/// Synthetic corpus plus the hand-written golden reactions.
fn fixture_corpus() -> Vec<CorpusRecord> {
    let mut records = generate_corpus(120, 7);
    records.extend(read_corpus(&golden_dir().join("corpus.tsv")).unwrap());
    records
}

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn self_consistency(lib: &FgLibrary) -> Check {
    let start = Instant::now();
    let corpus = fixture_corpus();
    let (kb, stats) = build_kb(&corpus, lib, &opts());
    ensure(stats.skipped() == 0, || format!("{} records skipped", stats.skipped()))?;
    let scorer = Scorer::new(&kb, lib).map_err(|e| e.to_string())?;
    for r in &corpus {
        let res = scorer.score(&r.reaction);
        ensure(res.score == 5, || format!("line {} scored {} ({}): {}", r.line, res.score, res.category, r.reaction))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{} reactions all score 5 in {:.2?}", corpus.len(), elapsed))
}

fn permutation_invariance(lib: &FgLibrary) -> Check {
    let reactions = generate_corpus(25, 11);
    let (kb, _) = build_kb(&generate_corpus(400, 12), lib, &opts());
    let scorer = Scorer::new(&kb, lib).map_err(|e| e.to_string())?;
    let mut scores = BTreeMap::new();
    for (i, r) in reactions.iter().enumerate() {
        let base = analyze_reaction(&parse_reaction(&r.reaction).unwrap(), lib).map_err(|e| e.to_string())?;
        let base_score = scorer.score(&r.reaction);
        *scores.entry(base_score.score).or_insert(0) += 1;
        for p in 0..10u64 {
            let text = permute_reaction(&r.reaction, 1000 * i as u64 + p).map_err(|e| e.to_string())?;
            let h = analyze_reaction(&parse_reaction(&text).unwrap(), lib).map_err(|e| e.to_string())?;
            for level in 1..=LEVELS {
                ensure(h.level(level).canonical_key == base.level(level).canonical_key, || {
                    format!("key L{level} differs for {} vs {text}", r.reaction)
                })?;
                ensure(h.signature(level) == base.signature(level), || format!("signature L{level} differs for {text}"))?;
            }
            let s = scorer.score(&text);
            ensure(
                (s.score, s.category, &s.violating_fgs) == (base_score.score, base_score.category, &base_score.violating_fgs),
                || format!("score differs for {text}"),
            )?;
        }
    }
    Ok(format!("250 permutations identical (score histogram {scores:?})"))
}

fn hierarchy(lib: &FgLibrary) -> Check {
    let corpus = fixture_corpus();
    for r in &corpus {
        let h = analyze_reaction(&parse_reaction(&r.reaction).unwrap(), lib).map_err(|e| e.to_string())?;
        for w in h.levels.windows(2) {
            ensure(w[0].left_atoms.is_subset(&w[1].left_atoms) && w[0].right_atoms.is_subset(&w[1].right_atoms), || {
                format!("atoms not nested at L{} for {}", w[0].level, r.reaction)
            })?;
        }
        for (n, w) in h.signatures.windows(2).enumerate() {
            ensure(w[1].is_subset_of(&w[0]), || format!("signature L{} not within L{} for {}", n + 2, n + 1, r.reaction))?;
        }
    }
    Ok(format!("{} reactions nested", corpus.len()))
}

/// Distinct valid reactant sets: linear alkanes of increasing length.
fn distinct_prediction(i: usize) -> String {
    "C".repeat(i + 1)
}

/// Builds a target record from designed unique scores, mixing in duplicates,
/// invalid strings and failed extractions at random positions.
fn designed_record(rng: &mut ChaCha8Rng, id: usize, unique_scores: &[u8]) -> TargetRecord {
    let mut samples: Vec<Option<String>> = Vec::new();
    for i in 0..unique_scores.len() {
        samples.push(Some(distinct_prediction(i)));
        for _ in 0..rng.gen_range(0..3) {
            match rng.gen_range(0..3) {
                0 => samples.push(Some(distinct_prediction(rng.gen_range(0..=i)))),
                1 => samples.push(Some("C(".into())),
                _ => samples.push(None),
            }
        }
    }
    let by_key: HashMap<String, u8> =
        unique_scores.iter().enumerate().map(|(i, &s)| (distinct_prediction(i), s)).collect();
    let n = samples.len();
    TargetRecord::build(&format!("T{id}"), "CC", samples, n, |key| stub_result(by_key[key]))
}

fn oracle_cc_at_k(scores: &[u8], k: usize) -> Rational64 {
    let padded: Vec<i64> = (0..k).map(|i| scores.get(i).map_or(0, |&s| i64::from(s))).collect();
    Rational64::new(padded.iter().sum(), k as i64)
}

fn metric_oracle() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for inst in 0..1000 {
        let n_targets = rng.gen_range(1..6);
        let designs: Vec<Vec<u8>> =
            (0..n_targets).map(|_| (0..rng.gen_range(0..13)).map(|_| rng.gen_range(0..=5u8)).collect()).collect();
        let records: Vec<TargetRecord> =
            designs.iter().enumerate().map(|(i, d)| designed_record(&mut rng, i, d)).collect();
        let n = Rational64::from_integer(n_targets as i64);
        let oracle_max: Vec<i64> = designs.iter().map(|d| d.iter().copied().max().map_or(0, i64::from)).collect();
        for (r, m) in records.iter().zip(&oracle_max) {
            ensure(i64::from(max_cc(r)) == *m, || format!("instance {inst}: max_cc"))?;
        }
        let oracle_avg_max = Rational64::from_integer(oracle_max.iter().sum()) / n;
        ensure(av_pt_max_cc(&records).unwrap() == oracle_avg_max, || format!("instance {inst}: av_pt_max_cc"))?;
        for k in [1usize, 3, 5, 10, 15] {
            let mut total = Rational64::from_integer(0);
            for (r, d) in records.iter().zip(&designs) {
                let o = oracle_cc_at_k(d, k);
                ensure(cc_at_k(r, k) == o, || format!("instance {inst}: cc_at_k k={k}"))?;
                total += o;
            }
            ensure(av_pt_top_k(&records, k).unwrap() == total / n, || format!("instance {inst}: av_pt_top_k k={k}"))?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("1000 instances agree in {elapsed:.2?}"))
}

fn worked_arithmetic() -> Check {
    let scores: HashMap<&str, u8> = [("CCO", 5u8), ("CCN", 3)].into();
    let build = |samples: Vec<&str>| {
        let n = samples.len();
        let samples = samples.into_iter().map(|s| Some(s.to_string())).collect();
        TargetRecord::build("T", "CC", samples, n, |key| stub_result(scores[key]))
    };
    let plain = cc_at_k(&build(vec!["CCO", "CCN"]), 5);
    ensure(plain == Rational64::new(8, 5), || format!("CC@5 = {plain}"))?;
    let dup = cc_at_k(&build(vec!["CCO", "CCN", "OCC", "CCO", "NCC"]), 5);
    ensure(dup == plain, || format!("with duplicates CC@5 = {dup}"))?;
    Ok(format!("CC@5 = {plain} = 1.6, unchanged with duplicates"))
}

fn monotone_growth(lib: &FgLibrary) -> Check {
    let c = generate_corpus(150, 21);
    let d = generate_corpus(150, 22);
    let union: Vec<CorpusRecord> = c.iter().chain(&d).cloned().collect();
    let (kb_c, _) = build_kb(&c, lib, &opts());
    let (kb_cd, _) = build_kb(&union, lib, &opts());
    let sc = Scorer::new(&kb_c, lib).map_err(|e| e.to_string())?;
    let scd = Scorer::new(&kb_cd, lib).map_err(|e| e.to_string())?;
    let queries: Vec<String> = generate_corpus(10, 23).into_iter().map(|r| r.reaction).collect();
    let mut pairs = Vec::new();
    for q in &queries {
        let (a, b) = (sc.score(q).score, scd.score(q).score);
        ensure(b >= a, || format!("score fell from {a} to {b} for {q}"))?;
        pairs.push(format!("{a}->{b}"));
    }
    Ok(format!("10 queries non-decreasing [{}]", pairs.join(" ")))
}

fn sharded_build(lib: &FgLibrary) -> Check {
    let corpus = generate_corpus(100, 31);
    let (single, _) = build_kb(&corpus, lib, &opts());
    let mut merged: Option<KnowledgeBase> = None;
    for shard in corpus.chunks(25) {
        let (part, _) = build_kb(shard, lib, &opts());
        merged = Some(match merged {
            None => part,
            Some(acc) => merge_kb(&acc, &part).map_err(|e| e.to_string())?,
        });
    }
    let merged = merged.unwrap();
    ensure(single.lookup_equivalent(&merged), || "entries differ".into())?;
    ensure(merged.metadata().reactions == single.metadata().reactions, || "reaction counts differ".into())?;
    let s1 = Scorer::new(&single, lib).map_err(|e| e.to_string())?;
    let s2 = Scorer::new(&merged, lib).map_err(|e| e.to_string())?;
    let queries: Vec<String> =
        corpus.iter().map(|r| r.reaction.clone()).chain(generate_corpus(50, 32).into_iter().map(|r| r.reaction)).collect();
    for q in &queries {
        ensure(s1.score(q) == s2.score(q), || format!("results differ for {q}"))?;
    }
    Ok(format!("4 shards merged; {} queries identical", queries.len()))
}

const ORACLE_PATTERNS: [&str; 10] = [
    "[CX3](=O)[OX2H1]",
    "c1ccccc1",
    "[#6][OX2][#6]",
    "[NX3;H2,H1]",
    "C=C",
    "[R]~[R]~[R]",
    "*~*(~*)~*",
    "[#7,#8;!R]",
    "[CX3](=O)[#7,#8]",
    "[C;r6;!a]",
];

const ORACLE_MOLECULES: [&str; 5] = [
    "CC(=O)Oc1ccccc1",
    "NCc1ccccc1C(=O)O",
    "OC(=O)CCC(N)=O",
    "C1CCC2CCCCC2C1",
    "CC(C)=CCOC(C)=O",
];

fn matching_oracle() -> Check {
    let start = Instant::now();
    let mut total = 0;
    let mut pairs = 0;
    for ps in ORACLE_PATTERNS {
        let p = parse_smarts(ps).map_err(|e| format!("{ps}: {e}"))?;
        for ms in ORACLE_MOLECULES {
            let mol = parse_smiles(ms).unwrap();
            ensure(mol.atom_count() <= 12, || format!("{ms} too large"))?;
            let fast = match_pattern(&p, &mol);
            let slow = brute_force_matches(&p, &mol);
            ensure(fast == slow, || format!("{ps} in {ms}: {} vs {} matches", fast.len(), slow.len()))?;
            total += fast.len();
            pairs += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("{pairs} pairs, {total} matches, in {elapsed:.2?}"))
}

fn golden_report(lib: &FgLibrary) -> Result<BenchmarkReport, String> {
    let dir = golden_dir();
    let corpus = read_corpus(&dir.join("corpus.tsv")).map_err(|e| e.to_string())?;
    let (kb, _) = build_kb(&corpus, lib, &opts());
    let scorer = Scorer::new(&kb, lib).map_err(|e| e.to_string())?;
    let targets = read_targets(&std::fs::read_to_string(dir.join("targets.tsv")).unwrap(), '\t').map_err(|e| e.to_string())?;
    let completions = read_completions(&std::fs::read_to_string(dir.join("completions.jsonl")).unwrap())
        .map_err(|e| e.to_string())?;
    run_benchmark(&targets, &completions, &scorer, &BenchConfig::default()).map_err(|e| e.to_string())
}

fn rat(v: &Value) -> Rational64 {
    Rational64::from_str(v.as_str().expect("rational string")).expect("rational")
}

fn golden_fixture(lib: &FgLibrary) -> Check {
    let start = Instant::now();
    let report = golden_report(lib)?;
    let expected: Value =
        serde_json::from_str(&std::fs::read_to_string(golden_dir().join("expected.json")).unwrap()).unwrap();
    let expected = &expected["models"];
    ensure(report.models.len() == expected.as_object().unwrap().len(), || "model count".into())?;
    let matrix = report.fg_error_matrix();
    for (mi, m) in report.models.iter().enumerate() {
        let e = &expected[&m.model_id];
        let id = &m.model_id;
        let a = &m.aggregate;
        ensure(a.av_pt_max_cc == rat(&e["av_pt_max_cc"]), || format!("{id}: Av. PT-Max {}", a.av_pt_max_cc))?;
        ensure(a.unique_fraction == rat(&e["unique_fraction"]), || format!("{id}: Unique {}", a.unique_fraction))?;
        ensure(a.unique_fraction_macro == rat(&e["unique_fraction_macro"]), || format!("{id}: macro Unique"))?;
        for (k, v) in e["av_pt_top_k"].as_object().unwrap() {
            let k: usize = k.parse().unwrap();
            ensure(a.av_pt_top_k[&k] == rat(v), || format!("{id}: CC@{k} {}", a.av_pt_top_k[&k]))?;
        }
        for (cat, got) in CategoryHistogram::COLUMNS.iter().zip(a.category_totals.values()) {
            let want = e["categories"][*cat].as_u64().unwrap() as usize;
            ensure(got == want, || format!("{id}: {cat} {got} != {want}"))?;
        }
        for rec in &m.records {
            let t = &e["targets"][&rec.target_id];
            let scores: Vec<u64> = rec.scores().map(u64::from).collect();
            let want: Vec<u64> = t["scores"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
            ensure(scores == want, || format!("{id}/{}: scores {scores:?}", rec.target_id))?;
            ensure(rec.n_valid as u64 == t["n_valid"].as_u64().unwrap(), || format!("{id}/{}: n_valid", rec.target_id))?;
            ensure(u64::from(max_cc(rec)) == t["max_cc"].as_u64().unwrap(), || format!("{id}/{}: Max", rec.target_id))?;
            for (k, v) in t["cc_at_k"].as_object().unwrap() {
                let k: usize = k.parse().unwrap();
                ensure(cc_at_k(rec, k) == rat(v), || format!("{id}/{}: CC@{k}", rec.target_id))?;
            }
        }
        let fg = e["fg_errors"].as_object().unwrap();
        for (fid, &count) in matrix[mi].iter().enumerate() {
            let want = fg.get(&report.fg_names[fid]).and_then(Value::as_u64).unwrap_or(0) as usize;
            ensure(count == want, || format!("{id}: fg {} count {count} != {want}", report.fg_names[fid]))?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("2 models x 3 targets x 15 samples match in {elapsed:.2?}"))
}

fn categorization_accounting(lib: &FgLibrary) -> Check {
    let report = golden_report(lib)?;
    let mut checked = 0;
    for m in &report.models {
        for rec in &m.records {
            let h = rec.histogram();
            let where_ = || format!("{}/{}", m.model_id, rec.target_id);
            ensure(h.total() == rec.n_samples, || format!("{}: {} categories for {} samples", where_(), h.total(), rec.n_samples))?;
            let dups = rec.outcomes.iter().filter(|o| matches!(o, SampleOutcome::Duplicate(_))).count();
            let empty = rec.outcomes.iter().filter(|o| matches!(o, SampleOutcome::Empty)).count();
            ensure(h.duplicate == dups && h.empty == empty, || format!("{}: duplicate/empty counts", where_()))?;
            let scored = h.pass + h.no_rc_precedent + h.fg_incompatible + h.mapping_failed + h.invalid_input;
            let invalid = rec.outcomes.iter().filter(|o| matches!(o, SampleOutcome::Invalid)).count();
            ensure(scored == rec.n_unique_valid + invalid, || format!("{}: scored categories", where_()))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} target records partition their samples"))
}

fn throughput(lib: &FgLibrary) -> Check {
    let corpus = generate_corpus(10_000, 2024);
    let start = Instant::now();
    let (kb, stats) = build_kb(&corpus, lib, &opts());
    let secs = start.elapsed().as_secs_f64();
    let rate = corpus.len() as f64 / secs;
    ensure(stats.skipped() == 0, || format!("{} skipped", stats.skipped()))?;
    ensure(rate >= 1000.0, || format!("{rate:.0} reactions/s"))?;
    Ok(format!("{rate:.0} reactions/s ({} L5 keys, {secs:.2} s)", kb.entry_count(5)))
}

#[test]
fn acceptance() {
    let lib = FgLibrary::default_library();
    let checks: Vec<Criterion> = vec![
        ("kb self-consistency", Box::new(|| self_consistency(&lib))),
        ("permutation invariance", Box::new(|| permutation_invariance(&lib))),
        ("rc hierarchy nesting", Box::new(|| hierarchy(&lib))),
        ("metric oracle", Box::new(metric_oracle)),
        ("worked arithmetic", Box::new(worked_arithmetic)),
        ("monotone kb growth", Box::new(|| monotone_growth(&lib))),
        ("sharded build equivalence", Box::new(|| sharded_build(&lib))),
        ("subgraph matching oracle", Box::new(matching_oracle)),
        ("golden fixture", Box::new(|| golden_fixture(&lib))),
        ("categorization accounting", Box::new(|| categorization_accounting(&lib))),
        ("kb build throughput", Box::new(|| throughput(&lib))),
    ];
    let mut failed = Vec::new();
    for (name, check) in &checks {
        match check() {
            Ok(msg) => println!("PASS  {name}: {msg}"),
            Err(msg) => {
                println!("FAIL  {name}: {msg}");
                failed.push(*name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
