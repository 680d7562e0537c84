//! Reaction plausibility scoring against a precedent knowledge base, plus
//! the benchmark metrics and harness built on it.

#![allow(clippy::needless_range_loop, clippy::type_complexity)]

pub mod chem;
pub mod harness;
pub mod kb;
pub mod metrics;
pub mod reaction;
pub mod scorer;
pub mod synth;

pub use chem::{
    canonical_ranks, match_pattern, parse_smarts, parse_smiles, perceive_rings,
    randomize_traversal, write_smiles, Atom, Bond, BondOrder, Chirality, Element, Molecule,
    QueryPattern, SmartsError, SmilesError,
};
