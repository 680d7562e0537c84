//! ChemCensor scoring of a single reaction against a knowledge base.

use std::fmt::Write as _;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::KnowledgeBase;
use crate::reaction::{
    analyze_reaction, map_reaction, parse_reaction, FgLibrary, Reaction, ReactionError,
    DEFAULT_COVERAGE_THRESHOLD, LEVELS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Category {
    Pass,
    NoRcPrecedent,
    FgIncompatible,
    InvalidInput,
    MappingFailed,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Pass,
        Category::NoRcPrecedent,
        Category::FgIncompatible,
        Category::InvalidInput,
        Category::MappingFailed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Pass => "PASS",
            Category::NoRcPrecedent => "NO_RC_PRECEDENT",
            Category::FgIncompatible => "FG_INCOMPATIBLE",
            Category::InvalidInput => "INVALID_INPUT",
            Category::MappingFailed => "MAPPING_FAILED",
        }
    }
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of scoring one reaction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CcResult {
    pub score: u8,
    pub category: Category,
    pub matched_level: u8,
    pub matched_key: Option<String>,
    /// Library ids present in the candidate but absent from the precedent
    /// aggregate; non-empty only for `FgIncompatible`.
    pub violating_fgs: Vec<usize>,
    pub doc_refs: Vec<String>,
    pub detail: String,
    /// The mapped reaction that was analyzed, when parsing and mapping succeeded.
    pub mapped_reaction: Option<String>,
    /// Extracted keys for levels 1..=5 (empty when analysis failed).
    pub keys: Vec<String>,
}

impl CcResult {
    fn failure(category: Category, detail: String) -> CcResult {
        CcResult {
            score: 0,
            category,
            matched_level: 0,
            matched_key: None,
            violating_fgs: Vec::new(),
            doc_refs: Vec::new(),
            detail,
            mapped_reaction: None,
            keys: Vec::new(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ScorerError {
    #[error(
        "functional-group library digest {library} does not match the knowledge base ({kb}); rebuild the knowledge base or pass the library it was built with"
    )]
    DigestMismatch { library: String, kb: String },
}

/// Scorer bound to one knowledge base and the library it was built with.
#[derive(Debug, Clone, Copy)]
pub struct Scorer<'a> {
    kb: &'a KnowledgeBase,
    library: &'a FgLibrary,
    coverage_threshold: f64,
}

impl<'a> Scorer<'a> {
    pub fn new(kb: &'a KnowledgeBase, library: &'a FgLibrary) -> Result<Scorer<'a>, ScorerError> {
        let meta = kb.metadata();
        if meta.library_digest != library.digest() || meta.library_size != library.len() {
            return Err(ScorerError::DigestMismatch {
                library: library.digest().to_string(),
                kb: meta.library_digest.clone(),
            });
        }
        Ok(Scorer { kb, library, coverage_threshold: DEFAULT_COVERAGE_THRESHOLD })
    }

    pub fn with_coverage_threshold(mut self, threshold: f64) -> Self {
        self.coverage_threshold = threshold;
        self
    }

    pub fn library(&self) -> &FgLibrary {
        self.library
    }

    pub fn kb(&self) -> &KnowledgeBase {
        self.kb
    }

    /// Scores reaction SMILES text; every input yields a result.
    pub fn score(&self, text: &str) -> CcResult {
        match parse_reaction(text) {
            Ok(rxn) => self.score_reaction(&rxn),
            Err(e) => CcResult::failure(Category::InvalidInput, e.to_string()),
        }
    }

    /// Scores a parsed reaction, mapping it first when it carries no maps.
    pub fn score_reaction(&self, rxn: &Reaction) -> CcResult {
        let mapped_holder;
        let rxn = if rxn.mapped {
            rxn
        } else {
            match map_reaction(rxn, self.coverage_threshold) {
                Ok(m) => {
                    mapped_holder = m.reaction;
                    &mapped_holder
                }
                Err(e @ ReactionError::MappingFailed { .. }) => {
                    return CcResult::failure(Category::MappingFailed, e.to_string())
                }
                Err(e) => return CcResult::failure(Category::InvalidInput, e.to_string()),
            }
        };
        let hierarchy = match analyze_reaction(rxn, self.library) {
            Ok(h) => h,
            Err(e) => {
                let mut r = CcResult::failure(Category::InvalidInput, e.to_string());
                r.mapped_reaction = Some(rxn.to_smiles());
                return r;
            }
        };
        let keys: Vec<String> = hierarchy.levels.iter().map(|p| p.canonical_key.clone()).collect();
        let mut result = CcResult::failure(Category::NoRcPrecedent, String::new());
        result.mapped_reaction = Some(rxn.to_smiles());
        let mut highest_present: Option<u8> = None;
        for level in (1..=LEVELS).rev() {
            let key = &keys[level as usize - 1];
            let Some(entry) = self.kb.lookup(level, key) else { continue };
            let candidate = hierarchy.signature(level);
            if candidate.is_subset_of(&entry.signature) {
                result.score = level;
                result.category = Category::Pass;
                result.matched_level = level;
                result.matched_key = Some(key.clone());
                result.doc_refs = entry.doc_refs.clone();
                result.detail = format!(
                    "reaction center and functional groups precedented at level {level} ({} precedent{})",
                    entry.count,
                    if entry.count == 1 { "" } else { "s" }
                );
                result.keys = keys;
                return result;
            }
            if highest_present.is_none() {
                highest_present = Some(level);
                result.violating_fgs = candidate.difference(&entry.signature);
                result.matched_key = Some(key.clone());
                result.doc_refs = entry.doc_refs.clone();
            }
        }
        match highest_present {
            Some(level) => {
                result.category = Category::FgIncompatible;
                result.detail = format!(
                    "reaction center precedented up to level {level}, but {} functional group{} never observed with it",
                    result.violating_fgs.len(),
                    if result.violating_fgs.len() == 1 { " was" } else { "s were" }
                );
            }
            None => {
                result.detail = "no synthetic precedents found for the reaction center at any level".into();
            }
        }
        result.keys = keys;
        result
    }
}

/// Convenience wrapper: build a scorer and score one reaction.
pub fn score_reaction(
    text: &str,
    kb: &KnowledgeBase,
    library: &FgLibrary,
) -> Result<CcResult, ScorerError> {
    Ok(Scorer::new(kb, library)?.score(text))
}

/// Per-category sample counts (Fig. 1 style bars).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryHistogram {
    #[serde(rename = "PASS")]
    pub pass: usize,
    #[serde(rename = "NO_RC_PRECEDENT")]
    pub no_rc_precedent: usize,
    #[serde(rename = "FG_INCOMPATIBLE")]
    pub fg_incompatible: usize,
    #[serde(rename = "INVALID_INPUT")]
    pub invalid_input: usize,
    #[serde(rename = "MAPPING_FAILED")]
    pub mapping_failed: usize,
    #[serde(rename = "DUPLICATE")]
    pub duplicate: usize,
    /// Samples with no extractable answer.
    #[serde(rename = "EMPTY")]
    pub empty: usize,
}

impl CategoryHistogram {
    pub const COLUMNS: [&'static str; 7] = [
        "PASS",
        "NO_RC_PRECEDENT",
        "FG_INCOMPATIBLE",
        "INVALID_INPUT",
        "MAPPING_FAILED",
        "DUPLICATE",
        "EMPTY",
    ];

    pub fn record(&mut self, category: Category) {
        *self.slot(category) += 1;
    }

    fn slot(&mut self, category: Category) -> &mut usize {
        match category {
            Category::Pass => &mut self.pass,
            Category::NoRcPrecedent => &mut self.no_rc_precedent,
            Category::FgIncompatible => &mut self.fg_incompatible,
            Category::InvalidInput => &mut self.invalid_input,
            Category::MappingFailed => &mut self.mapping_failed,
        }
    }

    pub fn get(&self, category: Category) -> usize {
        match category {
            Category::Pass => self.pass,
            Category::NoRcPrecedent => self.no_rc_precedent,
            Category::FgIncompatible => self.fg_incompatible,
            Category::InvalidInput => self.invalid_input,
            Category::MappingFailed => self.mapping_failed,
        }
    }

    /// Counts in `COLUMNS` order.
    pub fn values(&self) -> [usize; 7] {
        [
            self.pass,
            self.no_rc_precedent,
            self.fg_incompatible,
            self.invalid_input,
            self.mapping_failed,
            self.duplicate,
            self.empty,
        ]
    }

    pub fn total(&self) -> usize {
        self.values().iter().sum()
    }
}

impl AddAssign for CategoryHistogram {
    fn add_assign(&mut self, o: CategoryHistogram) {
        self.pass += o.pass;
        self.no_rc_precedent += o.no_rc_precedent;
        self.fg_incompatible += o.fg_incompatible;
        self.invalid_input += o.invalid_input;
        self.mapping_failed += o.mapping_failed;
        self.duplicate += o.duplicate;
        self.empty += o.empty;
    }
}

pub fn categorize_samples(results: &[CcResult], duplicates: usize) -> CategoryHistogram {
    let mut h = CategoryHistogram { duplicate: duplicates, ..CategoryHistogram::default() };
    for r in results {
        h.record(r.category);
    }
    h
}

/// Human-readable report for one result.
pub fn explain(result: &CcResult, library: &FgLibrary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "ChemCensor score: {} ({})", result.score, result.category);
    if let Some(rxn) = &result.mapped_reaction {
        let _ = writeln!(out, "mapped reaction: {rxn}");
    }
    match result.category {
        Category::Pass => {
            let _ = writeln!(out, "matched level: RC{}", result.matched_level);
            if let Some(key) = &result.matched_key {
                let _ = writeln!(out, "reaction center: {key}");
            }
            if result.doc_refs.is_empty() {
                let _ = writeln!(out, "references: none recorded");
            } else {
                let _ = writeln!(out, "references: {}", result.doc_refs.join(", "));
            }
        }
        Category::FgIncompatible => {
            if let Some(key) = &result.matched_key {
                let _ = writeln!(out, "reaction center: {key}");
            }
            let _ = writeln!(out, "functional groups without precedent for this reaction center:");
            for &id in &result.violating_fgs {
                let name = library.name(id).unwrap_or("?");
                let _ = writeln!(out, "  - {name} (id {id})");
            }
        }
        Category::NoRcPrecedent => {
            let _ = writeln!(out, "No synthetic precedents found for this reaction center.");
            if let Some(key) = result.keys.first() {
                let _ = writeln!(out, "extracted reaction center: {key}");
            }
        }
        Category::InvalidInput | Category::MappingFailed => {}
    }
    let _ = writeln!(out, "{}", result.detail);
    out
}
