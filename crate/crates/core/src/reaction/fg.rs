//! Functional-group library and signatures.

use std::fmt;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::chem::{match_atom_sets, parse_smarts, Molecule, QueryPattern, SmartsError};

const DEFAULT_LIBRARY: &str = include_str!("../../data/fg_library.tsv");

#[derive(Debug, Error)]
pub enum FgLibraryError {
    #[error("cannot read functional-group library: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("line {line}: pattern for '{name}' does not parse: {source}")]
    Smarts { line: usize, name: String, source: SmartsError },
    #[error("functional-group library is empty")]
    Empty,
}

#[derive(Debug, Clone)]
pub struct FgDefinition {
    pub id: usize,
    pub name: String,
    pub smarts: String,
    pub pattern: QueryPattern,
}

/// An ordered functional-group library with dense ids and a content digest.
#[derive(Debug, Clone)]
pub struct FgLibrary {
    definitions: Vec<FgDefinition>,
    digest: String,
}

impl FgLibrary {
    /// The bundled library.
    pub fn default_library() -> FgLibrary {
        FgLibrary::parse(DEFAULT_LIBRARY).expect("bundled library is valid")
    }

    pub fn load(path: &Path) -> Result<FgLibrary, FgLibraryError> {
        FgLibrary::parse(&std::fs::read_to_string(path)?)
    }

    /// Parses `id<TAB>name<TAB>SMARTS` records. Blank lines and lines
    /// starting with `#` are skipped; ids must run 0, 1, 2, ... in order.
    pub fn parse(text: &str) -> Result<FgLibrary, FgLibraryError> {
        let mut defs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim_end_matches('\r');
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('\t').collect();
            let [id, name, smarts] = fields.as_slice() else {
                return Err(FgLibraryError::Format { line, msg: format!("expected 3 fields, found {}", fields.len()) });
            };
            let id: usize = id
                .trim()
                .parse()
                .map_err(|_| FgLibraryError::Format { line, msg: format!("bad id '{id}'") })?;
            if id != defs.len() {
                return Err(FgLibraryError::Format { line, msg: format!("expected id {}, found {id}", defs.len()) });
            }
            let pattern = parse_smarts(smarts.trim()).map_err(|source| FgLibraryError::Smarts {
                line,
                name: name.to_string(),
                source,
            })?;
            defs.push(FgDefinition { id, name: name.trim().to_string(), smarts: smarts.trim().to_string(), pattern });
        }
        FgLibrary::from_definitions(defs)
    }

    pub fn from_definitions(definitions: Vec<FgDefinition>) -> Result<FgLibrary, FgLibraryError> {
        if definitions.is_empty() {
            return Err(FgLibraryError::Empty);
        }
        let mut hasher = Sha256::new();
        for d in &definitions {
            hasher.update(format!("{}\t{}\t{}\n", d.id, d.name, d.smarts).as_bytes());
        }
        let digest = hex::encode(hasher.finalize());
        Ok(FgLibrary { definitions, digest })
    }

    /// A library restricted to the first `n` definitions.
    pub fn truncated(&self, n: usize) -> Result<FgLibrary, FgLibraryError> {
        FgLibrary::from_definitions(self.definitions.iter().take(n).cloned().collect())
    }

    pub fn definitions(&self) -> &[FgDefinition] {
        &self.definitions
    }

    pub fn len(&self) -> usize {
        self.definitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.definitions.is_empty()
    }

    /// SHA-256 over the normalized records, lowercase hex.
    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.definitions.get(id).map(|d| d.name.as_str())
    }

    pub fn id_of(&self, name: &str) -> Option<usize> {
        self.definitions.iter().position(|d| d.name == name)
    }

    /// Every (fg id, matched atom set) in `mol`.
    pub fn matches_in(&self, mol: &Molecule) -> Vec<(usize, Vec<usize>)> {
        let mut present = [0u16; 128];
        for a in mol.atoms() {
            present[a.element.atomic_number() as usize & 127] += 1;
        }
        let mut out = Vec::new();
        for d in &self.definitions {
            if !d.pattern.required_elements_present(&present) {
                continue;
            }
            for set in match_atom_sets(&d.pattern, mol) {
                out.push((d.id, set));
            }
        }
        out
    }
}

/// Fixed-width bitset over library ids.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FgSignature {
    width: usize,
    words: Vec<u64>,
}

impl FgSignature {
    pub fn new(width: usize) -> FgSignature {
        FgSignature { width, words: vec![0; width.div_ceil(64)] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn set(&mut self, bit: usize) {
        assert!(bit < self.width, "bit {bit} outside signature width {}", self.width);
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        bit < self.width && self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn is_subset_of(&self, other: &FgSignature) -> bool {
        self.width == other.width && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn union_with(&mut self, other: &FgSignature) {
        assert_eq!(self.width, other.width, "signature widths differ");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// Bits set here but not in `other`.
    pub fn difference(&self, other: &FgSignature) -> Vec<usize> {
        self.ones().filter(|&b| !other.get(b)).collect()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.width).filter(|&b| self.get(b))
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Little-endian bytes (bit i in byte i/8), lowercase hex.
    pub fn to_hex(&self) -> String {
        let bytes: Vec<u8> = (0..self.width.div_ceil(8))
            .map(|i| (self.words[i / 8] >> ((i % 8) * 8)) as u8)
            .collect();
        hex::encode(bytes)
    }

    pub fn from_hex(text: &str, width: usize) -> Option<FgSignature> {
        let bytes = hex::decode(text).ok()?;
        if bytes.len() != width.div_ceil(8) {
            return None;
        }
        let mut sig = FgSignature::new(width);
        for (i, byte) in bytes.iter().enumerate() {
            sig.words[i / 8] |= (*byte as u64) << ((i % 8) * 8);
        }
        // no bits beyond the width
        if (width..bytes.len() * 8).any(|b| sig.words[b / 64] >> (b % 64) & 1 == 1) {
            return None;
        }
        Some(sig)
    }
}

impl fmt::Debug for FgSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FgSignature({}: {:?})", self.width, self.ones().collect::<Vec<_>>())
    }
}
