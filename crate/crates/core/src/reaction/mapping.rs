//! Heuristic atom mapping for unmapped reactions: greedy common-subgraph
//! growth of each reactant onto the product atoms not yet claimed.

use crate::chem::{canonical_ranks, Molecule};

use super::model::{Reaction, ReactionError};

pub const DEFAULT_COVERAGE_THRESHOLD: f64 = 0.90;

/// Result of [`map_reaction`].
#[derive(Debug, Clone)]
pub struct MappedReaction {
    pub reaction: Reaction,
    /// Mapped product atoms / product atoms.
    pub coverage: f64,
}

/// Flat index over all product atoms.
struct ProductPool<'a> {
    mols: &'a [Molecule],
    refs: Vec<(usize, usize)>,
    offset: Vec<usize>,
    rank: Vec<usize>,
}

impl<'a> ProductPool<'a> {
    fn new(mols: &'a [Molecule]) -> Self {
        let mut refs = Vec::new();
        let mut offset = Vec::new();
        let mut rank = Vec::new();
        for (mi, m) in mols.iter().enumerate() {
            offset.push(refs.len());
            let base = refs.len();
            for (ai, r) in canonical_ranks(m).into_iter().enumerate() {
                refs.push((mi, ai));
                rank.push(base + r);
            }
        }
        ProductPool { mols, refs, offset, rank }
    }

    fn atom(&self, p: usize) -> &crate::chem::Atom {
        let (m, a) = self.refs[p];
        self.mols[m].atom(a)
    }

    fn neighbors(&self, p: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (m, a) = self.refs[p];
        let base = self.offset[m];
        self.mols[m].neighbors(a).iter().map(move |&(j, b)| (base + j, b))
    }

    fn bond_order(&self, p: usize, bond: usize) -> crate::chem::BondOrder {
        self.mols[self.refs[p].0].bond(bond).order
    }

    fn total_h(&self, p: usize) -> u8 {
        let (m, a) = self.refs[p];
        self.mols[m].total_h(a)
    }
}

#[derive(Clone, Default)]
struct Fragment {
    pairs: Vec<(usize, usize)>, // (reactant atom, product pool atom)
    edges: usize,
    h_match: usize,
}

impl Fragment {
    fn score(&self) -> (usize, usize, usize) {
        (self.pairs.len(), self.edges, self.h_match)
    }
}

fn atoms_compatible(r: &Molecule, ra: usize, pool: &ProductPool, pa: usize) -> bool {
    let a = r.atom(ra);
    let b = pool.atom(pa);
    a.element == b.element
}

/// Grows one fragment from a seed pair. With `strict`, new pairs must keep
/// aromaticity and the bond order to their anchor.
fn grow(
    r: &Molecule,
    r_rank: &[usize],
    pool: &ProductPool,
    used: &[bool],
    seed: (usize, usize),
) -> Fragment {
    let mut r_map = vec![usize::MAX; r.atom_count()];
    let mut p_taken = used.to_vec();
    let mut frag = Fragment::default();
    let add = |frag: &mut Fragment, r_map: &mut Vec<usize>, p_taken: &mut Vec<bool>, ra: usize, pa: usize| {
        r_map[ra] = pa;
        p_taken[pa] = true;
        frag.pairs.push((ra, pa));
        if r.total_h(ra) == pool.total_h(pa) {
            frag.h_match += 1;
        }
    };
    add(&mut frag, &mut r_map, &mut p_taken, seed.0, seed.1);
    for strict in [true, false] {
        loop {
            // best candidate: (preserved edges, h equal, degree equal, -r_rank, -p_rank)
            let mut best: Option<((usize, bool, bool), (usize, usize), (usize, usize))> = None;
            for &(ra, pa) in &frag.pairs {
                for &(rn, rb) in r.neighbors(ra) {
                    if r_map[rn] != usize::MAX {
                        continue;
                    }
                    for (pn, pb) in pool.neighbors(pa) {
                        if p_taken[pn] || !atoms_compatible(r, rn, pool, pn) {
                            continue;
                        }
                        if strict
                            && (r.bond(rb).order != pool.bond_order(pn, pb)
                                || r.atom(rn).aromatic != pool.atom(pn).aromatic)
                        {
                            continue;
                        }
                        let preserved = r
                            .neighbors(rn)
                            .iter()
                            .filter(|&&(x, _)| {
                                r_map[x] != usize::MAX
                                    && pool.neighbors(pn).any(|(y, _)| y == r_map[x])
                            })
                            .count();
                        let key = (
                            preserved,
                            r.total_h(rn) == pool.total_h(pn),
                            r.degree(rn) == pool.neighbors(pn).count(),
                        );
                        let tie = (r_rank[rn], pool.rank[pn]);
                        let better = match &best {
                            None => true,
                            Some((k, t, _)) => key > *k || (key == *k && tie < *t),
                        };
                        if better {
                            best = Some((key, tie, (rn, pn)));
                        }
                    }
                }
            }
            let Some((key, _, (rn, pn))) = best else { break };
            add(&mut frag, &mut r_map, &mut p_taken, rn, pn);
            frag.edges += key.0;
        }
    }
    frag
}

fn best_fragment(r: &Molecule, pool: &ProductPool, used: &[bool]) -> Fragment {
    let r_rank = canonical_ranks(r);
    let mut r_order: Vec<usize> = (0..r.atom_count()).collect();
    r_order.sort_by_key(|&i| r_rank[i]);
    let mut p_order: Vec<usize> = (0..pool.refs.len()).filter(|&p| !used[p]).collect();
    p_order.sort_by_key(|&p| pool.rank[p]);
    let mut best = Fragment::default();
    for &ra in &r_order {
        for &pa in &p_order {
            let (x, y) = (r.atom(ra), pool.atom(pa));
            if x.element != y.element || x.aromatic != y.aromatic {
                continue;
            }
            let frag = grow(r, &r_rank, pool, used, (ra, pa));
            if frag.score() > best.score() {
                best = frag;
            }
        }
    }
    best
}

fn heavy_atoms(m: &Molecule) -> usize {
    m.atoms().iter().filter(|a| a.element != crate::chem::Element::H).count()
}

/// Assigns map numbers to an unmapped reaction. Reactants are aligned one
/// at a time (fewest heavy atoms first) onto the unclaimed product atoms.
pub fn map_reaction(rxn: &Reaction, threshold: f64) -> Result<MappedReaction, ReactionError> {
    if rxn.products.is_empty() {
        return Err(ReactionError::Syntax("no products".into()));
    }
    let reactants: Vec<Molecule> = rxn.reactants.iter().map(Molecule::without_map_numbers).collect();
    let products: Vec<Molecule> = rxn.products.iter().map(Molecule::without_map_numbers).collect();
    let pool = ProductPool::new(&products);
    let total = pool.refs.len();

    let mut order: Vec<usize> = (0..reactants.len()).collect();
    let texts: Vec<String> =
        reactants.iter().map(crate::chem::canonical_smiles_unmapped).collect();
    order.sort_by(|&a, &b| {
        heavy_atoms(&reactants[a]).cmp(&heavy_atoms(&reactants[b])).then_with(|| texts[a].cmp(&texts[b]))
    });

    let mut used = vec![false; total];
    let mut r_maps: Vec<Vec<u32>> = reactants.iter().map(|m| vec![0; m.atom_count()]).collect();
    let mut p_maps: Vec<u32> = vec![0; total];
    let mut assignments: Vec<(usize, usize, usize)> = Vec::new(); // (reactant, atom, pool atom)
    for &ri in &order {
        let frag = best_fragment(&reactants[ri], &pool, &used);
        for &(ra, pa) in &frag.pairs {
            used[pa] = true;
            assignments.push((ri, ra, pa));
        }
    }
    // map numbers follow product atom order
    assignments.sort_by_key(|&(_, _, pa)| pa);
    for (k, &(ri, ra, pa)) in assignments.iter().enumerate() {
        let m = k as u32 + 1;
        r_maps[ri][ra] = m;
        p_maps[pa] = m;
    }
    let mapped = assignments.len();
    if total == 0 || (mapped as f64) < threshold * total as f64 {
        return Err(ReactionError::MappingFailed { mapped, total });
    }

    let mut new_reactants = Vec::new();
    let mut reagents = rxn.reagents.clone();
    for (ri, mol) in reactants.iter().enumerate() {
        let m = mol.with_map_numbers(&r_maps[ri]).expect("fresh map numbers are unique");
        if r_maps[ri].iter().any(|&x| x != 0) {
            new_reactants.push(m);
        } else {
            reagents.push(mol.clone());
        }
    }
    let new_products = products
        .iter()
        .enumerate()
        .map(|(mi, mol)| {
            let base = pool.offset[mi];
            let maps: Vec<u32> = (0..mol.atom_count()).map(|a| p_maps[base + a]).collect();
            mol.with_map_numbers(&maps).expect("fresh map numbers are unique")
        })
        .collect();
    Ok(MappedReaction {
        reaction: Reaction { reactants: new_reactants, reagents, products: new_products, mapped: true },
        coverage: mapped as f64 / total as f64,
    })
}
