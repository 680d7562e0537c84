//! Pulling the final reactant-set SMILES out of a model completion.

use std::sync::OnceLock;

use regex::Regex;

use crate::chem::parse_smiles;

fn tag_pair() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?is)<\s*smiles\s*>(.*?)<\s*/\s*smiles\s*>").expect("valid regex"))
}

fn any_tag() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"</?\s*[A-Za-z][A-Za-z0-9_-]*\s*/?>").expect("valid regex"))
}

/// Content of the last non-empty `<smiles>` pair with all whitespace removed.
/// Without tags, falls back to the last token that parses as a molecule set
/// with at least two atoms.
pub fn extract_answer(completion: &str) -> Option<String> {
    let tagged = tag_pair()
        .captures_iter(completion)
        .map(|c| c[1].chars().filter(|ch| !ch.is_whitespace()).collect::<String>())
        .filter(|s| !s.is_empty())
        .last();
    if tagged.is_some() {
        return tagged;
    }
    let untagged = any_tag().replace_all(completion, " ");
    untagged
        .split_whitespace()
        .rev()
        .map(|tok| {
            tok.trim_start_matches(['`', '*', '"', '\''])
                .trim_end_matches(['`', '*', '"', '\'', ',', ';', ':', '.'])
        })
        .find(|tok| !tok.is_empty() && parse_smiles(tok).is_ok_and(|m| m.atom_count() >= 2))
        .map(str::to_string)
}
