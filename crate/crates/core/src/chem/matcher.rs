//! Substructure search: backtracking over a connected visiting order of the
//! query, in the spirit of VF2.

use std::collections::BTreeMap;

use super::molecule::Molecule;
use super::smarts::QueryPattern;

/// Query atom visiting order; every atom after the first (per component of
/// the order) has an earlier neighbor, recorded as its anchor.
struct Order {
    atoms: Vec<usize>,
    anchor: Vec<Option<(usize, usize)>>,
}

fn visiting_order(pattern: &QueryPattern) -> Order {
    let n = pattern.atom_count();
    let mut seen = vec![false; n];
    let mut atoms = Vec::with_capacity(n);
    let mut anchor = Vec::with_capacity(n);
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        atoms.push(start);
        anchor.push(None);
        let mut head = atoms.len() - 1;
        while head < atoms.len() {
            let v = atoms[head];
            head += 1;
            for &(w, bi) in pattern.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    atoms.push(w);
                    anchor.push(Some((v, bi)));
                }
            }
        }
    }
    Order { atoms, anchor }
}

struct Search<'a, F: FnMut(&[usize]) -> bool> {
    pattern: &'a QueryPattern,
    mol: &'a Molecule,
    order: Order,
    allowed: &'a dyn Fn(usize) -> bool,
    mapping: Vec<usize>,
    used: Vec<bool>,
    visit: F,
}

impl<F: FnMut(&[usize]) -> bool> Search<'_, F> {
    /// Returns false when the visitor asked to stop.
    fn extend(&mut self, depth: usize) -> bool {
        if depth == self.order.atoms.len() {
            return (self.visit)(&self.mapping);
        }
        let q = self.order.atoms[depth];
        let candidates: Vec<usize> = match self.order.anchor[depth] {
            Some((qa, _)) => self.mol.neighbors(self.mapping[qa]).iter().map(|&(j, _)| j).collect(),
            None => (0..self.mol.atom_count()).collect(),
        };
        for t in candidates {
            if self.used[t] || !(self.allowed)(t) || !self.pattern.atoms[q].matches(self.mol, t) {
                continue;
            }
            if !self.bonds_consistent(q, t) {
                continue;
            }
            self.mapping[q] = t;
            self.used[t] = true;
            let go_on = self.extend(depth + 1);
            self.used[t] = false;
            self.mapping[q] = usize::MAX;
            if !go_on {
                return false;
            }
        }
        true
    }

    fn bonds_consistent(&self, q: usize, t: usize) -> bool {
        self.pattern.neighbors(q).iter().all(|&(qn, qb)| {
            let tn = self.mapping[qn];
            if tn == usize::MAX {
                return true;
            }
            match self.mol.bond_between(t, tn) {
                Some(bi) => self.pattern.bonds[qb].expr.matches(self.mol, bi),
                None => false,
            }
        })
    }
}

fn search<F: FnMut(&[usize]) -> bool>(
    pattern: &QueryPattern,
    mol: &Molecule,
    allowed: &dyn Fn(usize) -> bool,
    visit: F,
) {
    if pattern.atom_count() == 0 || pattern.atom_count() > mol.atom_count() {
        return;
    }
    let mut s = Search {
        pattern,
        mol,
        order: visiting_order(pattern),
        allowed,
        mapping: vec![usize::MAX; pattern.atom_count()],
        used: vec![false; mol.atom_count()],
        visit,
    };
    s.extend(0);
}

fn bond_set(pattern: &QueryPattern, mol: &Molecule, mapping: &[usize]) -> Vec<usize> {
    let mut bonds: Vec<usize> = pattern
        .bonds
        .iter()
        .filter_map(|b| mol.bond_between(mapping[b.a], mapping[b.b]))
        .collect();
    bonds.sort_unstable();
    bonds
}

/// All matches of `pattern` in `mol`, as `mapping[query_atom] = mol_atom`.
///
/// Mappings that cover the same atoms and bonds (differing only by a query
/// automorphism) are reported once, using the lexicographically smallest
/// mapping. The result is sorted.
pub fn match_pattern(pattern: &QueryPattern, mol: &Molecule) -> Vec<Vec<usize>> {
    let mut best: BTreeMap<(Vec<usize>, Vec<usize>), Vec<usize>> = BTreeMap::new();
    search(pattern, mol, &|_| true, |m| {
        let mut atoms = m.to_vec();
        atoms.sort_unstable();
        let key = (atoms, bond_set(pattern, mol, m));
        match best.get_mut(&key) {
            Some(existing) if existing.as_slice() <= m => {}
            Some(existing) => *existing = m.to_vec(),
            None => {
                best.insert(key, m.to_vec());
            }
        }
        true
    });
    let mut out: Vec<Vec<usize>> = best.into_values().collect();
    out.sort();
    out
}

/// Whether some match uses only atoms accepted by `allowed`.
pub fn has_match_within(
    pattern: &QueryPattern,
    mol: &Molecule,
    allowed: &dyn Fn(usize) -> bool,
) -> bool {
    let mut found = false;
    search(pattern, mol, allowed, |_| {
        found = true;
        false
    });
    found
}

/// Distinct atom sets covered by matches (sorted, deduplicated).
pub fn match_atom_sets(pattern: &QueryPattern, mol: &Molecule) -> Vec<Vec<usize>> {
    let mut sets: Vec<Vec<usize>> = Vec::new();
    search(pattern, mol, &|_| true, |m| {
        let mut atoms = m.to_vec();
        atoms.sort_unstable();
        sets.push(atoms);
        true
    });
    sets.sort();
    sets.dedup();
    sets
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::{parse_smarts, parse_smiles};

    fn matches(p: &str, m: &str) -> Vec<Vec<usize>> {
        match_pattern(&parse_smarts(p).unwrap(), &parse_smiles(m).unwrap())
    }

    #[test]
    fn single_atoms() {
        assert_eq!(matches("O", "CCO"), vec![vec![2]]);
        assert_eq!(matches("C", "CCO"), vec![vec![0], vec![1]]);
    }

    #[test]
    fn carboxylic_acid() {
        assert_eq!(matches("C(=O)[OH]", "CC(=O)O"), vec![vec![1, 2, 3]]);
    }

    #[test]
    fn symmetric_pattern_deduplicated() {
        assert_eq!(matches("c1ccccc1", "c1ccccc1").len(), 1);
        assert_eq!(matches("CC", "CCC").len(), 2);
    }

    #[test]
    fn restricted_search() {
        let p = parse_smarts("C#N").unwrap();
        let m = parse_smiles("N#CCCC#N").unwrap();
        assert!(has_match_within(&p, &m, &|i| i >= 3));
        assert!(!has_match_within(&p, &m, &|i| (1..=4).contains(&i)));
    }

    #[test]
    fn bond_expressions() {
        assert!(matches("C=O", "CCO").is_empty());
        assert_eq!(matches("C~O", "CC=O").len(), 1);
        assert_eq!(matches("[#6]!@[#6]", "C1CC1C").len(), 1);
        assert_eq!(matches("[R]", "C1CC1C").len(), 3);
    }
}
