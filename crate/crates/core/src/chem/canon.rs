//! Canonical atom ranking by iterative neighborhood refinement.

use super::molecule::{permutation_is_odd, BondOrder, Chirality, Molecule};

/// Labelled graph view used by the refinement: per-node adjacency with an
/// integer edge label.
pub(crate) type LabelledAdjacency = Vec<Vec<(usize, u32)>>;

/// Dense ranks (0-based) of `keys`; equal keys share a rank.
pub(crate) fn dense_ranks<K: Ord>(keys: &[K]) -> Vec<u32> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut ranks = vec![0u32; keys.len()];
    let mut current = 0u32;
    for w in 0..idx.len() {
        if w > 0 && keys[idx[w]] != keys[idx[w - 1]] {
            current += 1;
        }
        ranks[idx[w]] = current;
    }
    ranks
}

fn class_count(classes: &[u32]) -> usize {
    classes.iter().copied().max().map_or(0, |m| m as usize + 1)
}

/// Refines an initial partition until neighborhoods stop splitting classes.
pub(crate) fn refine(initial: Vec<u32>, adj: &LabelledAdjacency) -> Vec<u32> {
    let mut classes = dense_ranks(&initial);
    let mut count = class_count(&classes);
    let mut keys: Vec<(u32, Vec<(u32, u32)>)> = Vec::with_capacity(classes.len());
    loop {
        if count == classes.len() {
            return classes;
        }
        keys.clear();
        for (i, nbrs) in adj.iter().enumerate() {
            let mut env: Vec<(u32, u32)> = nbrs.iter().map(|&(j, l)| (classes[j], l)).collect();
            env.sort_unstable();
            keys.push((classes[i], env));
        }
        let next = dense_ranks(&keys);
        let next_count = class_count(&next);
        if next_count == count {
            return next;
        }
        classes = next;
        count = next_count;
    }
}

/// Splits remaining ties one at a time: the lowest tied class gives its
/// lowest-index member a smaller rank, then refinement runs again.
pub(crate) fn break_ties(classes: Vec<u32>, adj: &LabelledAdjacency) -> Vec<u32> {
    let mut classes = refine(classes, adj);
    let n = classes.len();
    while class_count(&classes) < n {
        let mut counts = vec![0usize; n];
        for &c in &classes {
            counts[c as usize] += 1;
        }
        let tied = counts.iter().position(|&c| c > 1).expect("a tied class exists") as u32;
        let chosen = classes.iter().position(|&c| c == tied).expect("member exists");
        let split: Vec<u32> = classes
            .iter()
            .enumerate()
            .map(|(i, &c)| 2 * c + u32::from(c == tied && i != chosen))
            .collect();
        classes = refine(split, adj);
    }
    classes
}

pub(crate) fn bond_label(order: BondOrder) -> u32 {
    match order {
        BondOrder::Single => 1,
        BondOrder::Double => 2,
        BondOrder::Triple => 3,
        BondOrder::Aromatic => 4,
    }
}

pub(crate) fn molecule_adjacency(mol: &Molecule) -> LabelledAdjacency {
    (0..mol.atom_count())
        .map(|i| {
            mol.neighbors(i)
                .iter()
                .map(|&(j, bi)| (j, bond_label(mol.bond(bi).order)))
                .collect()
        })
        .collect()
}

/// Result of canonicalization: unique ranks plus which stereo elements are
/// well defined (a center with two equivalent neighbors carries no stereo).
#[derive(Debug, Clone)]
pub(crate) struct Canonical {
    pub ranks: Vec<usize>,
    pub chiral_ok: Vec<bool>,
    pub bond_stereo_ok: Vec<bool>,
}

/// Chirality of `atom` relative to neighbors ordered by `key` (implicit
/// hydrogen first). Returns `None` if two neighbors share a key.
pub(crate) fn chirality_relative_to<K: Ord + Copy>(
    mol: &Molecule,
    atom: usize,
    key: impl Fn(usize) -> K,
) -> Option<Chirality> {
    let tag = mol.atom(atom).chirality;
    if tag == Chirality::None {
        return None;
    }
    let reference: Vec<usize> = mol.neighbors(atom).iter().map(|&(j, _)| j).collect();
    let mut by_key = reference.clone();
    by_key.sort_by_key(|&j| key(j));
    if by_key.windows(2).any(|w| key(w[0]) == key(w[1])) {
        return None;
    }
    Some(tag.flipped_if(permutation_is_odd(&reference, &by_key)))
}

/// Cis flag of a stereo double bond relative to the highest-`key`
/// neighbor on each end. `None` when an end has two equivalent neighbors.
pub(crate) fn bond_cis_relative_to<K: Ord + Copy>(
    mol: &Molecule,
    bond: usize,
    key: impl Fn(usize) -> K,
) -> Option<bool> {
    let b = mol.bond(bond);
    let stereo = b.stereo?;
    let mut cis = stereo.cis;
    for (end, other, stored) in [(b.a, b.b, stereo.ref_a), (b.b, b.a, stereo.ref_b)] {
        let subs: Vec<usize> =
            mol.neighbors(end).iter().map(|&(j, _)| j).filter(|&j| j != other).collect();
        let best = match subs.as_slice() {
            [only] => *only,
            [x, y] => {
                if key(*x) == key(*y) {
                    return None;
                }
                if key(*x) > key(*y) {
                    *x
                } else {
                    *y
                }
            }
            _ => return None,
        };
        if best != stored {
            cis = !cis;
        }
    }
    Some(cis)
}

pub(crate) fn canonicalize(mol: &Molecule, include_maps: bool) -> Canonical {
    let n = mol.atom_count();
    let adj = molecule_adjacency(mol);
    let invariants: Vec<(u8, u16, i8, usize, u8, bool, bool, u32)> = (0..n)
        .map(|i| {
            let a = mol.atom(i);
            (
                a.element.atomic_number(),
                a.isotope,
                a.formal_charge,
                mol.degree(i),
                a.explicit_h,
                a.aromatic,
                a.in_ring,
                if include_maps { a.map_number } else { 0 },
            )
        })
        .collect();
    let classes = refine(dense_ranks(&invariants), &adj);

    let mut chiral_ok = vec![false; n];
    let mut chiral_code = vec![0u8; n];
    for i in 0..n {
        if let Some(c) = chirality_relative_to(mol, i, |j| classes[j]) {
            chiral_ok[i] = true;
            chiral_code[i] = if c == Chirality::Ccw { 1 } else { 2 };
        }
    }
    let mut bond_stereo_ok = vec![false; mol.bond_count()];
    let mut bond_code = vec![Vec::new(); n];
    for bi in 0..mol.bond_count() {
        if let Some(cis) = bond_cis_relative_to(mol, bi, |j| classes[j]) {
            bond_stereo_ok[bi] = true;
            let b = mol.bond(bi);
            let code = if cis { 1u8 } else { 2 };
            bond_code[b.a].push(code);
            bond_code[b.b].push(code);
        }
    }
    let with_stereo: Vec<(u32, u8, Vec<u8>)> = (0..n)
        .map(|i| {
            let mut codes = bond_code[i].clone();
            codes.sort_unstable();
            (classes[i], chiral_code[i], codes)
        })
        .collect();
    let final_classes = break_ties(dense_ranks(&with_stereo), &adj);
    Canonical {
        ranks: final_classes.into_iter().map(|c| c as usize).collect(),
        chiral_ok,
        bond_stereo_ok,
    }
}

/// Canonical ranks: a permutation of `0..n` that depends only on the
/// molecular graph (including map numbers and stereo), not on input order.
pub fn canonical_ranks(mol: &Molecule) -> Vec<usize> {
    canonicalize(mol, true).ranks
}
