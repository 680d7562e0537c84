use std::collections::{BTreeMap, BTreeSet};

use crate::chem::{BondOrder, Molecule};

use super::model::{Reaction, ReactionError, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChangeKind {
    BondFormed,
    BondBroken,
    OrderChanged,
    ChargeChanged,
    HChanged,
    Appeared,
    Disappeared,
}

/// Map numbers of atoms that change, with what changed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DynamicAtomSet {
    pub map_numbers: BTreeSet<u32>,
    pub change_kinds: BTreeMap<u32, BTreeSet<ChangeKind>>,
}

/// Local environment of a mapped atom: mapped neighbors with bond orders,
/// plus how many unmapped neighbors there are.
struct Environment {
    mapped: BTreeMap<u32, BondOrder>,
    unmapped: usize,
    charge: i8,
    total_h: u8,
    aromatic: bool,
}

fn environment(mol: &Molecule, atom: usize) -> Environment {
    let mut mapped = BTreeMap::new();
    let mut unmapped = 0;
    for &(j, bi) in mol.neighbors(atom) {
        let m = mol.atom(j).map_number;
        if m == 0 {
            unmapped += 1;
        } else {
            mapped.insert(m, mol.bond(bi).order);
        }
    }
    let a = mol.atom(atom);
    Environment { mapped, unmapped, charge: a.formal_charge, total_h: mol.total_h(atom), aromatic: a.aromatic }
}

/// Compares every mapped atom across the two sides.
pub fn detect_dynamic_atoms(rxn: &Reaction) -> Result<DynamicAtomSet, ReactionError> {
    if !rxn.mapped {
        return Err(ReactionError::Unmapped);
    }
    let left = rxn.map_index(Side::Left);
    let right = rxn.map_index(Side::Right);
    let all: BTreeSet<u32> = left.keys().chain(right.keys()).copied().collect();
    let mut out = DynamicAtomSet::default();
    for m in all {
        let mut kinds = BTreeSet::new();
        match (left.get(&m), right.get(&m)) {
            (Some(_), None) => {
                kinds.insert(ChangeKind::Disappeared);
            }
            (None, Some(_)) => {
                kinds.insert(ChangeKind::Appeared);
            }
            (Some(&(lm, la)), Some(&(rm, ra))) => {
                let l = environment(&rxn.reactants[lm], la);
                let r = environment(&rxn.products[rm], ra);
                if r.mapped.keys().any(|k| !l.mapped.contains_key(k)) {
                    kinds.insert(ChangeKind::BondFormed);
                }
                if l.mapped.keys().any(|k| !r.mapped.contains_key(k)) {
                    kinds.insert(ChangeKind::BondBroken);
                }
                // neighbors that appear or leave unmapped
                if r.unmapped > 0 {
                    kinds.insert(ChangeKind::BondFormed);
                }
                if l.unmapped > 0 {
                    kinds.insert(ChangeKind::BondBroken);
                }
                let order_changed = l
                    .mapped
                    .iter()
                    .any(|(k, o)| r.mapped.get(k).is_some_and(|p| p != o))
                    || l.aromatic != r.aromatic;
                if order_changed {
                    kinds.insert(ChangeKind::OrderChanged);
                }
                if l.charge != r.charge {
                    kinds.insert(ChangeKind::ChargeChanged);
                }
                if l.total_h != r.total_h {
                    kinds.insert(ChangeKind::HChanged);
                }
            }
            (None, None) => unreachable!("map number drawn from one of the sides"),
        }
        if !kinds.is_empty() {
            out.map_numbers.insert(m);
            out.change_kinds.insert(m, kinds);
        }
    }
    if out.map_numbers.is_empty() {
        return Err(ReactionError::EmptyCenter);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reaction::parse_reaction;

    fn dynamic(text: &str) -> Result<Vec<u32>, ReactionError> {
        detect_dynamic_atoms(&parse_reaction(text).unwrap())
            .map(|d| d.map_numbers.into_iter().collect())
    }

    #[test]
    fn esterification() {
        let d = dynamic("[CH3:1][OH:2].[CH3:5][C:3](=[O:4])O>>[CH3:1][O:2][C:3](=[O:4])[CH3:5]");
        assert_eq!(d.unwrap(), vec![2, 3]);
    }

    #[test]
    fn substitution() {
        assert_eq!(dynamic("[CH3:1][Br:2].[NH3:3]>>[CH3:1][NH2:3]").unwrap(), vec![1, 2, 3]);
    }

    #[test]
    fn identity_is_empty() {
        assert_eq!(dynamic("[CH4:1]>>[CH4:1]"), Err(ReactionError::EmptyCenter));
    }

    #[test]
    fn change_kinds() {
        let d = detect_dynamic_atoms(
            &parse_reaction("[CH3:1][Br:2].[NH3:3]>>[CH3:1][NH2:3]").unwrap(),
        )
        .unwrap();
        assert!(d.change_kinds[&2].contains(&ChangeKind::Disappeared));
        assert!(d.change_kinds[&3].contains(&ChangeKind::HChanged));
        assert!(d.change_kinds[&1].contains(&ChangeKind::BondFormed));
        assert!(d.change_kinds[&1].contains(&ChangeKind::BondBroken));
    }
}
