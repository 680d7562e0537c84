//! Property tests for parsing, canonicalization, matching, rings, reaction
//! analysis and the benchmark metrics.

use std::collections::HashMap;

use num_rational::Rational64;
use proptest::prelude::*;

use chemcensor::chem::canonical_smiles_unmapped;
use chemcensor::metrics::{cc_at_k, max_cc, unique_fraction, TargetRecord};
use chemcensor::reaction::{analyze_reaction, parse_reaction, FgLibrary, LEVELS};
use chemcensor::synth::{generate_corpus, permute_reaction, SUBSTITUENTS};
use chemcensor::{match_pattern, parse_smarts, parse_smiles, randomize_traversal, write_smiles};

mod common;
use common::{brute_force_matches, stub_result};

const MOLECULES: &[&str] = &[
    "CC(=O)Oc1ccccc1C(=O)O",
    "Cn1cnc2c1c(=O)n(C)c(=O)n2C",
    "C[C@H](N)C(=O)O",
    "F/C=C/Cl",
    "C1CC2CCC1CC2",
    "c1ccc2ccccc2c1",
    "C1CCC2(CC1)CCCC2",
    "[NH4+].[O-]C(=O)C",
    "O=C1CCCN1",
    "c1ccncc1",
    "c1cc[nH]c1",
    "N#CC[C@@H](O)c1ccco1",
    "OC[C@H]1O[C@@H](O)[C@H](O)[C@@H](O)[C@@H]1O",
    "CC(C)(C)OC(=O)N1CCC(CC1)C(=O)Cl",
    "Brc1cccc(c1)B(O)O",
    "C=CC(=O)OCC",
    "[2H]C([2H])([2H])O",
    "C1=CC=CC=C1",
    "S(=O)(=O)(N)c1ccc(cc1)C",
    "C12C3C4C1C5C2C3C45",
];

const PATTERNS: &[&str] = &[
    "[CX3](=O)[OX2H1]",
    "c:c",
    "[#6]~[#8]",
    "[R2]",
    "[C;!R]=,#[C,N]",
    "*1**1",
    "[N;+,H2]",
    "[c;r6]",
    "[#6]-[#7]-[#6]",
    "[OX2]",
];

fn molecule_pool() -> Vec<&'static str> {
    MOLECULES.iter().chain(SUBSTITUENTS).copied().filter(|s| parse_smiles(s).is_ok()).collect()
}

fn canonical(s: &str) -> String {
    write_smiles(&parse_smiles(s).unwrap(), true)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn smiles_round_trip(idx in 0usize..1000) {
        let pool = molecule_pool();
        let text = pool[idx % pool.len()];
        let mol = parse_smiles(text).unwrap();
        let written = write_smiles(&mol, false);
        let again = parse_smiles(&written).unwrap();
        prop_assert_eq!(again.atom_count(), mol.atom_count());
        prop_assert_eq!(again.bond_count(), mol.bond_count());
        prop_assert_eq!(write_smiles(&again, true), write_smiles(&mol, true));
    }

    #[test]
    fn canonical_form_ignores_traversal(idx in 0usize..1000, seed in any::<u64>()) {
        let pool = molecule_pool();
        let text = pool[idx % pool.len()];
        let mol = parse_smiles(text).unwrap();
        let shuffled = randomize_traversal(&mol, seed);
        prop_assert_eq!(canonical(&shuffled), canonical(text), "traversal {}", shuffled);
        prop_assert_eq!(
            canonical_smiles_unmapped(&parse_smiles(&shuffled).unwrap()),
            canonical_smiles_unmapped(&mol)
        );
    }

    #[test]
    fn matcher_agrees_with_brute_force(p in 0usize..PATTERNS.len(), m in 0usize..1000, seed in any::<u64>()) {
        let pool: Vec<&str> = molecule_pool()
            .into_iter()
            .filter(|s| parse_smiles(s).unwrap().atom_count() <= 12)
            .collect();
        let mol = parse_smiles(&randomize_traversal(&parse_smiles(pool[m % pool.len()]).unwrap(), seed)).unwrap();
        let pattern = parse_smarts(PATTERNS[p]).unwrap();
        prop_assert_eq!(match_pattern(&pattern, &mol), brute_force_matches(&pattern, &mol));
    }

    #[test]
    fn rings_are_cycles_with_the_right_count(idx in 0usize..1000) {
        let pool = molecule_pool();
        let mol = parse_smiles(pool[idx % pool.len()]).unwrap();
        let rings = mol.rings();
        let expected = mol.bond_count() + mol.components().len() - mol.atom_count();
        prop_assert_eq!(rings.len(), expected);
        for ring in rings {
            prop_assert!(ring.len() >= 3);
            for i in 0..ring.len() {
                let (a, b) = (ring[i], ring[(i + 1) % ring.len()]);
                prop_assert!(mol.bond_between(a, b).is_some(), "{:?} is not a cycle", ring);
            }
            let mut sorted = ring.clone();
            sorted.sort_unstable();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), ring.len());
        }
    }

    #[test]
    fn reaction_analysis_ignores_atom_order_and_map_labels(idx in 0usize..60, seed in any::<u64>()) {
        let lib = FgLibrary::default_library();
        let corpus = generate_corpus(60, 5);
        let text = &corpus[idx].reaction;
        let base = analyze_reaction(&parse_reaction(text).unwrap(), &lib).unwrap();
        let permuted = permute_reaction(text, seed).unwrap();
        let h = analyze_reaction(&parse_reaction(&permuted).unwrap(), &lib).unwrap();
        for level in 1..=LEVELS {
            prop_assert_eq!(&h.level(level).canonical_key, &base.level(level).canonical_key);
            prop_assert_eq!(h.signature(level), base.signature(level));
        }
    }

    #[test]
    fn metric_invariants(
        scores in proptest::collection::vec(0u8..=5, 0..12),
        dup_positions in proptest::collection::vec(any::<prop::sample::Index>(), 0..10),
        k in 1usize..16,
    ) {
        let keys: Vec<String> = (0..scores.len()).map(|i| "C".repeat(i + 1)).collect();
        let by_key: HashMap<String, u8> = keys.iter().cloned().zip(scores.iter().copied()).collect();
        let build = |samples: Vec<String>| {
            let n = samples.len().max(1);
            TargetRecord::build("T", "CC", samples.into_iter().map(Some).collect(), n, |key| stub_result(by_key[key]))
        };
        let plain = build(keys.clone());
        let mut with_dups = keys.clone();
        if !keys.is_empty() {
            for ix in &dup_positions {
                with_dups.push(keys[ix.index(keys.len())].clone());
            }
        }
        let dup = build(with_dups);
        let cc = cc_at_k(&plain, k);
        prop_assert_eq!(cc, cc_at_k(&dup, k));
        prop_assert_eq!(max_cc(&plain), max_cc(&dup));
        prop_assert!(cc <= Rational64::from_integer(i64::from(max_cc(&plain))));
        prop_assert!(cc >= Rational64::from_integer(0));
        prop_assert!(cc_at_k(&plain, k + 1) * Rational64::from_integer(k as i64 + 1) >= cc * Rational64::from_integer(k as i64));
        prop_assert!(unique_fraction(std::slice::from_ref(&dup)) <= Rational64::from_integer(1));
        prop_assert_eq!(dup.histogram().total(), dup.n_samples);
    }
}
