//! Knowledge-base construction, persistence and scoring.

use chemcensor::kb::{
    build_kb, load_kb, merge_kb, read_kb, save_kb, write_kb, BuildOptions, CorpusRecord, KbError, KnowledgeBase,
};
use chemcensor::reaction::{analyze_reaction, parse_reaction, FgLibrary, FgSignature, LEVELS};
use chemcensor::scorer::{categorize_samples, explain, Category, Scorer, ScorerError};
use chemcensor::synth::generate_corpus;

mod common;
use common::stub_result;

/// Acetylation of `head-(CH2)n-OH`; `head` carries map 1 and any extra
/// mapped atoms above 100.
fn acetylation(head: &str, chain: usize) -> String {
    let body: String = (0..chain).map(|i| format!("[CH2:{}]", i + 2)).collect();
    format!(
        "{head}{body}[OH:50].[CH3:53][C:51](=[O:52])O>>{head}{body}[O:50][C:51](=[O:52])[CH3:53]"
    )
}

fn records(reactions: &[&str]) -> Vec<CorpusRecord> {
    reactions
        .iter()
        .enumerate()
        .map(|(i, r)| CorpusRecord { line: i + 1, reaction: r.to_string(), doc_ref: Some(format!("DOC{i}")) })
        .collect()
}

fn kb_of(reactions: &[&str], lib: &FgLibrary) -> KnowledgeBase {
    let (kb, stats) = build_kb(&records(reactions), lib, &BuildOptions { built: Some(0), ..BuildOptions::default() });
    assert_eq!(stats.skipped(), 0, "{:?}", stats.examples);
    kb
}

fn signatures(reaction: &str, lib: &FgLibrary) -> Vec<FgSignature> {
    analyze_reaction(&parse_reaction(reaction).unwrap(), lib).unwrap().signatures
}

fn keys(reaction: &str, lib: &FgLibrary) -> Vec<String> {
    let h = analyze_reaction(&parse_reaction(reaction).unwrap(), lib).unwrap();
    h.levels.into_iter().map(|p| p.canonical_key).collect()
}

fn nitrile(lib: &FgLibrary) -> usize {
    lib.id_of("nitrile").unwrap()
}

#[test]
fn single_reaction_gives_one_entry_per_level() {
    let lib = FgLibrary::default_library();
    let r = acetylation("[CH3:1]", 6);
    let kb = kb_of(&[&r], &lib);
    let sigs = signatures(&r, &lib);
    for (level, key) in (1..=LEVELS).zip(keys(&r, &lib)) {
        assert_eq!(kb.entry_count(level), 1);
        let e = kb.lookup(level, &key).unwrap();
        assert_eq!(e.count, 1);
        assert_eq!(&e.signature, &sigs[level as usize - 1]);
        assert_eq!(e.doc_refs, vec!["DOC0".to_string()]);
    }
    let twice = kb_of(&[&r, &r], &lib);
    for (level, key) in (1..=LEVELS).zip(keys(&r, &lib)) {
        let e = twice.lookup(level, &key).unwrap();
        assert_eq!(e.count, 2);
        assert_eq!(&e.signature, &sigs[level as usize - 1]);
    }
}

#[test]
fn shared_key_aggregates_the_union_of_signatures() {
    let lib = FgLibrary::default_library();
    let bromo = acetylation("[Br:101][CH2:1]", 6);
    let cyano = acetylation("[N:101]#[C:1]", 6);
    let (kb_bromo, kb_cyano) = (keys(&bromo, &lib), keys(&cyano, &lib));
    assert_eq!(kb_bromo[0], kb_cyano[0]);
    let kb = kb_of(&[&bromo, &cyano], &lib);
    let entry = kb.lookup(1, &kb_bromo[0]).unwrap();
    let mut expected = signatures(&bromo, &lib)[0].clone();
    expected.union_with(&signatures(&cyano, &lib)[0]);
    assert_eq!(entry.signature, expected);
    let bits: Vec<usize> = entry.signature.ones().collect();
    assert_eq!(bits, vec![nitrile(&lib), lib.id_of("alkyl_bromide").unwrap()]);
    assert_eq!(entry.count, 2);
}

#[test]
fn distant_nitrile_bit_persists_until_a_shell_absorbs_it() {
    let lib = FgLibrary::default_library();
    let far = signatures(&acetylation("[N:101]#[C:1]", 6), &lib);
    assert!(far.iter().all(|s| s.get(nitrile(&lib))));
    // nitrile carbon five bonds from the reacting oxygen
    let near = signatures(&acetylation("[N:101]#[C:1]", 4), &lib);
    for (i, s) in near.iter().enumerate() {
        assert_eq!(s.get(nitrile(&lib)), i < 4, "level {}", i + 1);
    }
}

#[test]
fn distant_nitrile_is_fg_incompatible() {
    let lib = FgLibrary::default_library();
    let kb = kb_of(&[&acetylation("[CH3:1]", 6)], &lib);
    let scorer = Scorer::new(&kb, &lib).unwrap();
    let res = scorer.score(&acetylation("[N:101]#[C:1]", 6));
    assert_eq!(res.category, Category::FgIncompatible);
    assert_eq!(res.score, 0);
    assert_eq!(res.violating_fgs, vec![nitrile(&lib)]);
    assert_eq!(res.matched_level, 0);
    assert!(explain(&res, &lib).contains("nitrile"));

    let same = scorer.score(&acetylation("[CH3:1]", 6));
    assert_eq!((same.score, same.category), (5, Category::Pass));
    let report = explain(&same, &lib);
    assert!(report.contains("DOC0") && report.contains('5'), "{report}");
}

#[test]
fn unknown_center_and_invalid_input() {
    let lib = FgLibrary::default_library();
    let kb = kb_of(&[&acetylation("[CH3:1]", 6)], &lib);
    let scorer = Scorer::new(&kb, &lib).unwrap();
    let amide = "[CH3:1][C:2](=[O:3])O.[NH2:4][CH3:5]>>[CH3:1][C:2](=[O:3])[NH:4][CH3:5]";
    let res = scorer.score(amide);
    assert_eq!((res.score, res.category), (0, Category::NoRcPrecedent));
    let report = explain(&res, &lib);
    assert!(report.contains("No synthetic precedents"));
    assert!(report.contains(&res.keys[0]), "{report}");

    for bad in ["C(>>", "", "CC>>", "not a reaction"] {
        let r = scorer.score(bad);
        assert_eq!((r.score, r.category), (0, Category::InvalidInput), "{bad}");
    }
    let mapped_nothing = scorer.score("CCCC>>c1ccccc1C(=O)O");
    assert_eq!(mapped_nothing.category, Category::MappingFailed);
}

#[test]
fn levels_are_separate_namespaces() {
    let lib = FgLibrary::default_library();
    let r = acetylation("[CH3:1]", 6);
    let kb = kb_of(&[&r], &lib);
    let k = keys(&r, &lib);
    assert!(kb.lookup(1, &k[0]).is_some());
    assert!(kb.lookup(2, &k[0]).is_none());
    assert!(kb.lookup(1, "L1|nothing").is_none());
    assert!(kb.lookup(0, &k[0]).is_none());
    assert!(kb.lookup(6, &k[0]).is_none());
}

#[test]
fn ester_keys_track_shell_growth() {
    let lib = FgLibrary::default_library();
    let methyl = "[CH3:1][C:2](=[O:3])O.[CH3:4][OH:5]>>[CH3:1][C:2](=[O:3])[O:5][CH3:4]";
    let ethyl = "[CH3:1][C:2](=[O:3])O.[CH3:6][CH2:4][OH:5]>>[CH3:1][C:2](=[O:3])[O:5][CH2:4][CH3:6]";
    let (m, e) = (keys(methyl, &lib), keys(ethyl, &lib));
    assert_eq!(m[0], e[0]);
    assert!((1..5).any(|i| m[i] != e[i]));
    let amide = "[CH3:1][C:2](=[O:3])O.[CH3:4][NH2:5]>>[CH3:1][C:2](=[O:3])[NH:5][CH3:4]";
    let a = keys(amide, &lib);
    assert!(m.iter().zip(&a).all(|(x, y)| x != y));
}

#[test]
fn merge_identity_and_commutativity() {
    let lib = FgLibrary::default_library();
    let opts = BuildOptions { built: Some(0), ..BuildOptions::default() };
    let (a, _) = build_kb(&generate_corpus(60, 1), &lib, &opts);
    let (b, _) = build_kb(&generate_corpus(60, 2), &lib, &opts);
    let empty = KnowledgeBase::empty(&lib, &opts);
    assert!(merge_kb(&a, &empty).unwrap().lookup_equivalent(&a));
    let ab = merge_kb(&a, &b).unwrap();
    let ba = merge_kb(&b, &a).unwrap();
    assert!(ab.lookup_equivalent(&ba));
    assert_eq!(ab.metadata().reactions, 120);
    let (sab, sba) = (Scorer::new(&ab, &lib).unwrap(), Scorer::new(&ba, &lib).unwrap());
    for r in generate_corpus(40, 3) {
        let (x, y) = (sab.score(&r.reaction), sba.score(&r.reaction));
        assert_eq!((x.score, x.category, x.violating_fgs), (y.score, y.category, y.violating_fgs));
    }
    let small = lib.truncated(10).unwrap();
    let foreign = KnowledgeBase::empty(&small, &opts);
    assert!(matches!(merge_kb(&a, &foreign), Err(KbError::MetadataMismatch(_))));
}

#[test]
fn save_load_round_trip_and_corruption() {
    let lib = FgLibrary::default_library();
    let kb = kb_of(
        &[
            &acetylation("[CH3:1]", 6),
            &acetylation("[N:101]#[C:1]", 6),
            "[CH3:1][C:2](=[O:3])O.[NH2:4][CH3:5]>>[CH3:1][C:2](=[O:3])[NH:4][CH3:5]",
        ],
        &lib,
    );
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kb.txt");
    save_kb(&kb, &path).unwrap();
    let back = load_kb(&path).unwrap();
    assert!(back.lookup_equivalent(&kb));
    assert_eq!(back.metadata(), kb.metadata());
    for level in 1..=LEVELS {
        let (x, y) = (kb.entries(level), back.entries(level));
        assert_eq!(x, y);
    }

    let mut buf = Vec::new();
    write_kb(&kb, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let truncated = &text[..text.len() / 2];
    assert!(matches!(read_kb(truncated.as_bytes()), Err(KbError::Format { .. })));
    let bumped = text.replacen("CHEMCENSOR-KB\t1", "CHEMCENSOR-KB\t99", 1);
    assert!(matches!(read_kb(bumped.as_bytes()), Err(KbError::Version { found: 99, .. })));
    assert!(matches!(load_kb(&dir.path().join("missing")), Err(KbError::Io(_))));
}

#[test]
fn foreign_library_is_rejected_at_scorer_init() {
    let lib = FgLibrary::default_library();
    let kb = kb_of(&[&acetylation("[CH3:1]", 6)], &lib);
    let other = lib.truncated(50).unwrap();
    assert!(matches!(Scorer::new(&kb, &other), Err(ScorerError::DigestMismatch { .. })));
}

#[test]
fn sample_categories_partition_the_samples() {
    let mut results = Vec::new();
    results.extend((0..9).map(|_| stub_result(5)));
    results.extend((0..2).map(|_| stub_result(0)));
    let mut fg = stub_result(0);
    fg.category = Category::FgIncompatible;
    results.push(fg);
    let mut bad = stub_result(0);
    bad.category = Category::InvalidInput;
    results.push(bad);
    let h = categorize_samples(&results, 2);
    assert_eq!(h.values(), [9, 2, 1, 1, 0, 2, 0]);
    assert_eq!(h.total(), 15);
    assert_eq!(categorize_samples(&[], 0).total(), 0);
}
