//! Shared inputs for the criterion benchmarks.

use chemcensor::kb::{build_kb, BuildOptions, CorpusRecord, KnowledgeBase};
use chemcensor::reaction::FgLibrary;
use chemcensor::synth::generate_corpus;

pub const CORPUS_SEED: u64 = 2024;

pub fn corpus(n: usize) -> Vec<CorpusRecord> {
    generate_corpus(n, CORPUS_SEED)
}

pub fn knowledge_base(n: usize, library: &FgLibrary) -> KnowledgeBase {
    let opts = BuildOptions { built: Some(0), ..BuildOptions::default() };
    build_kb(&corpus(n), library, &opts).0
}

/// Drug-like molecules of increasing size.
pub const MOLECULES: &[(&str, &str)] = &[
    ("aspirin", "CC(=O)Oc1ccccc1C(=O)O"),
    ("caffeine", "Cn1cnc2c1c(=O)n(C)c(=O)n2C"),
    ("imatinib", "Cc1ccc(NC(=O)c2ccc(CN3CCN(C)CC3)cc2)cc1Nc1nccc(-c2cccnc2)n1"),
    ("atorvastatin", "CC(C)c1c(C(=O)Nc2ccccc2)c(-c2ccccc2)c(-c2ccc(F)cc2)n1CC[C@@H](O)C[C@@H](O)CC(=O)O"),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inputs_parse() {
        for (name, s) in MOLECULES {
            assert!(chemcensor::parse_smiles(s).is_ok(), "{name}");
        }
        assert_eq!(corpus(10).len(), 10);
    }
}
