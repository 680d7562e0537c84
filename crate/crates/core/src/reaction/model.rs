use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::chem::{parse_smiles, GraphError, Molecule, SmilesError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReactionError {
    #[error("reaction syntax error: {0}")]
    Syntax(String),
    #[error("invalid SMILES in reaction: {0}")]
    Smiles(#[from] SmilesError),
    #[error("atom map error: {0}")]
    Map(String),
    #[error("atom mapping failed: coverage {mapped}/{total} below threshold")]
    MappingFailed { mapped: usize, total: usize },
    #[error("reaction has no dynamic atoms")]
    EmptyCenter,
    #[error("reaction is not atom-mapped")]
    Unmapped,
    #[error("level {0} is outside 1..=5")]
    BadLevel(u8),
}

/// Reaction side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
}

/// A parsed reaction. Reactant-group molecules that share no map number
/// with the products are moved to `reagents` once the reaction is mapped.
#[derive(Debug, Clone)]
pub struct Reaction {
    pub reactants: Vec<Molecule>,
    pub reagents: Vec<Molecule>,
    pub products: Vec<Molecule>,
    pub mapped: bool,
}

impl Reaction {
    pub fn side(&self, side: Side) -> &[Molecule] {
        match side {
            Side::Left => &self.reactants,
            Side::Right => &self.products,
        }
    }

    /// Map number → (molecule, atom) on one side.
    pub fn map_index(&self, side: Side) -> HashMap<u32, (usize, usize)> {
        let mut out = HashMap::new();
        for (mi, mol) in self.side(side).iter().enumerate() {
            for (ai, atom) in mol.atoms().iter().enumerate() {
                if atom.map_number != 0 {
                    out.insert(atom.map_number, (mi, ai));
                }
            }
        }
        out
    }

    /// Reaction SMILES with map numbers (non-canonical, input atom order).
    pub fn to_smiles(&self) -> String {
        let join = |mols: &[Molecule]| {
            mols.iter().map(|m| crate::chem::write_smiles(m, false)).collect::<Vec<_>>().join(".")
        };
        format!("{}>{}>{}", join(&self.reactants), join(&self.reagents), join(&self.products))
    }
}

fn parse_group(text: &str, group: &str) -> Result<Vec<Molecule>, ReactionError> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split('.')
        .map(|part| {
            if part.is_empty() {
                return Err(ReactionError::Syntax(format!("empty molecule in {group}")));
            }
            parse_smiles(part).map_err(|e| match e {
                SmilesError::Graph(GraphError::DuplicateMap(m)) => {
                    ReactionError::Map(format!("duplicate map number {m} among {group}"))
                }
                other => ReactionError::Smiles(other),
            })
        })
        .collect()
}

fn map_owner(mols: &[Molecule], group: &str) -> Result<BTreeMap<u32, (usize, usize)>, ReactionError> {
    let mut seen = BTreeMap::new();
    for (mi, mol) in mols.iter().enumerate() {
        for (ai, atom) in mol.atoms().iter().enumerate() {
            if atom.map_number != 0 && seen.insert(atom.map_number, (mi, ai)).is_some() {
                return Err(ReactionError::Map(format!(
                    "duplicate map number {} among {group}",
                    atom.map_number
                )));
            }
        }
    }
    Ok(seen)
}

/// Parses `reactants>reagents>products` (the reagent group may be empty).
/// Anything after the first whitespace (e.g. CXSMILES extensions) is ignored.
pub fn parse_reaction(text: &str) -> Result<Reaction, ReactionError> {
    let text = text.split_whitespace().next().unwrap_or("");
    let groups: Vec<&str> = text.split('>').collect();
    if groups.len() != 3 {
        return Err(ReactionError::Syntax(format!(
            "expected 'reactants>reagents>products', found {} '>' separators",
            groups.len().saturating_sub(1)
        )));
    }
    let mut reactants = parse_group(groups[0], "reactants")?;
    let mut reagents = parse_group(groups[1], "reagents")?;
    let products = parse_group(groups[2], "products")?;
    if reactants.is_empty() {
        return Err(ReactionError::Syntax("no reactants".into()));
    }
    if products.is_empty() {
        return Err(ReactionError::Syntax("no products".into()));
    }

    let left = map_owner(&reactants, "reactants")?;
    let right = map_owner(&products, "products")?;
    let reagent_maps = map_owner(&reagents, "reagents")?;
    if let Some(m) = reagent_maps.keys().find(|m| right.contains_key(m)) {
        return Err(ReactionError::Map(format!("reagent atom shares map number {m} with a product")));
    }
    let shared: Vec<u32> = right.keys().copied().filter(|m| left.contains_key(m)).collect();
    let mapped = !shared.is_empty();
    if mapped {
        for (&m, &(pm, pa)) in &right {
            let Some(&(rm, ra)) = left.get(&m) else {
                return Err(ReactionError::Map(format!(
                    "product map number {m} has no reactant counterpart"
                )));
            };
            let pe = products[pm].atom(pa).element;
            let re = reactants[rm].atom(ra).element;
            if pe != re {
                return Err(ReactionError::Map(format!(
                    "map number {m} is {} in reactants but {} in products",
                    re.symbol(),
                    pe.symbol()
                )));
            }
        }
        // reactant-group molecules contributing no mapped atom to a product
        let (keep, moved): (Vec<Molecule>, Vec<Molecule>) = reactants.into_iter().partition(|mol| {
            mol.atoms().iter().any(|a| a.map_number != 0 && right.contains_key(&a.map_number))
        });
        reactants = keep;
        reagents.extend(moved);
    }
    Ok(Reaction { reactants, reagents, products, mapped })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mapped_identity() {
        let r = parse_reaction("[CH4:1]>>[CH4:1]").unwrap();
        assert_eq!((r.reactants.len(), r.reagents.len(), r.products.len()), (1, 0, 1));
        assert!(r.mapped);
    }

    #[test]
    fn unmapped() {
        let r = parse_reaction("CCO>>CC=O").unwrap();
        assert!(!r.mapped);
    }

    #[test]
    fn duplicate_maps() {
        assert!(matches!(parse_reaction("[CH3:1].[CH3:1]>>C"), Err(ReactionError::Map(_))));
        assert!(matches!(parse_reaction("[CH3:1][CH3:1]>>C"), Err(ReactionError::Map(_))));
    }

    #[test]
    fn syntax() {
        assert!(matches!(parse_reaction("C(>>"), Err(ReactionError::Smiles(_))));
        assert!(matches!(parse_reaction("CC"), Err(ReactionError::Syntax(_))));
        assert!(matches!(parse_reaction(">>CC"), Err(ReactionError::Syntax(_))));
        assert!(matches!(parse_reaction("CC>>"), Err(ReactionError::Syntax(_))));
    }

    #[test]
    fn element_mismatch() {
        assert!(matches!(parse_reaction("[CH4:1]>>[NH3:1]"), Err(ReactionError::Map(_))));
    }

    #[test]
    fn unmapped_reactant_molecule_becomes_reagent() {
        let r = parse_reaction("[CH3:1][OH:2].O=S(=O)(O)O>CCOCC>[CH3:1][O:2]C").unwrap();
        assert_eq!(r.reactants.len(), 1);
        assert_eq!(r.reagents.len(), 2);
    }

    #[test]
    fn extension_is_ignored() {
        let r = parse_reaction("[CH4:1]>>[CH4:1] |f:0|").unwrap();
        assert!(r.mapped);
    }
}
