//! Oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use chemcensor::scorer::{Category, CcResult};
use chemcensor::{Molecule, QueryPattern};

pub fn stub_result(score: u8) -> CcResult {
    CcResult {
        score,
        category: if score > 0 { Category::Pass } else { Category::NoRcPrecedent },
        matched_level: score,
        matched_key: None,
        violating_fgs: Vec::new(),
        doc_refs: Vec::new(),
        detail: String::new(),
        mapped_reaction: None,
        keys: Vec::new(),
    }
}

/// Every injective assignment of query atoms to molecule atoms, filtered by
/// atom and bond predicates, reduced to one mapping per covered atom/bond set.
pub fn brute_force_matches(p: &QueryPattern, mol: &Molecule) -> Vec<Vec<usize>> {
    fn rec(p: &QueryPattern, mol: &Molecule, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == p.atom_count() {
            let ok = p.bonds.iter().all(|b| {
                mol.bond_between(cur[b.a], cur[b.b]).is_some_and(|bi| b.expr.matches(mol, bi))
            });
            if ok {
                out.push(cur.clone());
            }
            return;
        }
        for a in 0..mol.atom_count() {
            if !used[a] && p.atoms[cur.len()].matches(mol, a) {
                used[a] = true;
                cur.push(a);
                rec(p, mol, cur, used, out);
                cur.pop();
                used[a] = false;
            }
        }
    }
    let mut all = Vec::new();
    rec(p, mol, &mut Vec::new(), &mut vec![false; mol.atom_count()], &mut all);
    let mut best: BTreeMap<(Vec<usize>, Vec<usize>), Vec<usize>> = BTreeMap::new();
    for m in all {
        let mut atoms = m.clone();
        atoms.sort_unstable();
        let mut bonds: Vec<usize> = p.bonds.iter().map(|b| mol.bond_between(m[b.a], m[b.b]).unwrap()).collect();
        bonds.sort_unstable();
        let slot = best.entry((atoms, bonds)).or_insert_with(|| m.clone());
        if m < *slot {
            *slot = m;
        }
    }
    let mut out: Vec<Vec<usize>> = best.into_values().collect();
    out.sort();
    out
}
