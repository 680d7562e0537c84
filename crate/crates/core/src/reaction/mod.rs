//! Reactions: parsing, atom mapping, reaction-center extraction and
//! functional-group signatures.

mod center;
mod dynamic;
mod fg;
mod mapping;
mod model;

pub use center::{
    analyze_reaction, compute_fg_signature, extract_rc, rc_canonical_key, RcHierarchy, RcPattern,
    LEVELS,
};
pub use dynamic::{detect_dynamic_atoms, ChangeKind, DynamicAtomSet};
pub use fg::{FgDefinition, FgLibrary, FgLibraryError, FgSignature};
pub use mapping::{map_reaction, MappedReaction, DEFAULT_COVERAGE_THRESHOLD};
pub use model::{parse_reaction, Reaction, ReactionError, Side};
