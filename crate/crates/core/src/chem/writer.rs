//! SMILES writer. A traversal plan (DFS spanning forest with ring-closure
//! bookkeeping) is computed from an atom priority, then rendered.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::canon::canonicalize;
use super::element::Element;
use super::molecule::{implicit_hydrogens, permutation_is_odd, BondOrder, Chirality, Molecule};

#[derive(Debug, Clone, Copy)]
pub(crate) struct RingEntry {
    pub partner: usize,
    pub bond: usize,
    pub opening: bool,
}

/// DFS spanning forest over a graph given as `(neighbor, edge)` lists.
#[derive(Debug, Clone)]
pub(crate) struct Plan {
    pub roots: Vec<usize>,
    pub position: Vec<usize>,
    pub parent: Vec<Option<(usize, usize)>>,
    pub children: Vec<Vec<(usize, usize)>>,
    pub ring_entries: Vec<Vec<RingEntry>>,
}

impl Plan {
    /// `priority[i]` orders atoms (lower first). Components start at their
    /// lowest-priority atom and are emitted in that order.
    pub(crate) fn new(adjacency: &[Vec<(usize, usize)>], priority: &[usize]) -> Plan {
        let n = adjacency.len();
        let mut plan = Plan {
            roots: Vec::new(),
            position: vec![usize::MAX; n],
            parent: vec![None; n],
            children: vec![Vec::new(); n],
            ring_entries: vec![Vec::new(); n],
        };
        let mut by_priority: Vec<usize> = (0..n).collect();
        by_priority.sort_by_key(|&i| priority[i]);
        let sorted_nbrs: Vec<Vec<(usize, usize)>> = adjacency
            .iter()
            .map(|l| {
                let mut l = l.clone();
                l.sort_by_key(|&(j, _)| priority[j]);
                l
            })
            .collect();
        let mut used_edge = std::collections::HashSet::new();
        let mut on_stack = vec![false; n];
        let mut counter = 0usize;
        let mut closings: Vec<Vec<RingEntry>> = vec![Vec::new(); n];
        let mut openings: Vec<Vec<RingEntry>> = vec![Vec::new(); n];
        for &root in &by_priority {
            if plan.position[root] != usize::MAX {
                continue;
            }
            plan.roots.push(root);
            plan.position[root] = counter;
            counter += 1;
            on_stack[root] = true;
            let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
            while let Some(&mut (v, ref mut cursor)) = stack.last_mut() {
                if *cursor >= sorted_nbrs[v].len() {
                    on_stack[v] = false;
                    stack.pop();
                    continue;
                }
                let (w, e) = sorted_nbrs[v][*cursor];
                *cursor += 1;
                if used_edge.contains(&e) {
                    continue;
                }
                used_edge.insert(e);
                if plan.position[w] == usize::MAX {
                    plan.position[w] = counter;
                    counter += 1;
                    plan.parent[w] = Some((v, e));
                    plan.children[v].push((w, e));
                    on_stack[w] = true;
                    stack.push((w, 0));
                } else {
                    debug_assert!(on_stack[w], "undirected DFS back edges go to ancestors");
                    openings[w].push(RingEntry { partner: v, bond: e, opening: true });
                    closings[v].push(RingEntry { partner: w, bond: e, opening: false });
                }
            }
        }
        for v in 0..n {
            let mut entries = std::mem::take(&mut closings[v]);
            // closings: in order of their openings' emission
            entries.sort_by_key(|r| (plan.position[r.partner], r.bond));
            let mut opens = std::mem::take(&mut openings[v]);
            opens.sort_by_key(|r| (plan.position[r.partner], r.bond));
            entries.extend(opens);
            plan.ring_entries[v] = entries;
        }
        plan
    }

    /// Neighbor order as written in the string (the implicit hydrogen slot,
    /// when requested, directly follows the parent).
    pub(crate) fn written_neighbors(&self, v: usize, with_h: bool) -> Vec<Option<usize>> {
        let mut out = Vec::new();
        if let Some((p, _)) = self.parent[v] {
            out.push(Some(p));
        }
        if with_h {
            out.push(None);
        }
        out.extend(self.ring_entries[v].iter().map(|r| Some(r.partner)));
        out.extend(self.children[v].iter().map(|&(c, _)| Some(c)));
        out
    }
}

/// Renders a plan. `atom_token` and `bond_token` produce the per-atom and
/// per-bond text; `bond_token` receives (bond, first written atom).
pub(crate) fn render_plan(
    plan: &Plan,
    mut atom_token: impl FnMut(usize) -> String,
    mut bond_token: impl FnMut(usize, usize) -> String,
) -> String {
    let mut out = String::new();
    let mut digit_of_bond = std::collections::HashMap::new();
    let mut free: Vec<bool> = vec![true; 100];
    for (ci, &root) in plan.roots.iter().enumerate() {
        if ci > 0 {
            out.push('.');
        }
        // explicit stack of (atom, child cursor); entering an atom writes it
        enum Step {
            Enter(usize, Option<usize>, bool),
            Close,
        }
        let mut work = vec![Step::Enter(root, None, false)];
        while let Some(step) = work.pop() {
            match step {
                Step::Close => out.push(')'),
                Step::Enter(v, via, branch) => {
                    if branch {
                        out.push('(');
                    }
                    if let Some(e) = via {
                        let parent = plan.parent[v].expect("non-root has parent").0;
                        out.push_str(&bond_token(e, parent));
                    }
                    out.push_str(&atom_token(v));
                    for r in &plan.ring_entries[v] {
                        if r.opening {
                            let d = free.iter().skip(1).position(|&f| f).map_or(99, |p| p + 1);
                            free[d] = false;
                            digit_of_bond.insert(r.bond, d);
                            out.push_str(&bond_token(r.bond, v));
                            push_digit(&mut out, d);
                        } else {
                            let d = digit_of_bond.remove(&r.bond).expect("ring opened earlier");
                            free[d] = true;
                            push_digit(&mut out, d);
                        }
                    }
                    let kids = &plan.children[v];
                    for (k, &(c, e)) in kids.iter().enumerate().rev() {
                        let is_branch = k + 1 < kids.len();
                        if is_branch {
                            work.push(Step::Close);
                        }
                        work.push(Step::Enter(c, Some(e), is_branch));
                    }
                }
            }
        }
    }
    out
}

fn push_digit(out: &mut String, d: usize) {
    if d < 10 {
        out.push(char::from(b'0' + d as u8));
    } else {
        out.push_str(&format!("%{d:02}"));
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct WriteOptions {
    pub include_maps: bool,
    pub include_stereo: bool,
    pub force_brackets: bool,
}

impl Default for WriteOptions {
    fn default() -> Self {
        WriteOptions { include_maps: true, include_stereo: true, force_brackets: false }
    }
}

fn molecule_adjacency_edges(mol: &Molecule) -> Vec<Vec<(usize, usize)>> {
    (0..mol.atom_count()).map(|i| mol.neighbors(i).to_vec()).collect()
}

pub(crate) fn write_with_priority(
    mol: &Molecule,
    priority: &[usize],
    chiral_ok: &[bool],
    bond_stereo_ok: &[bool],
    opts: WriteOptions,
) -> String {
    let plan = Plan::new(&molecule_adjacency_edges(mol), priority);
    let bond_dirs = if opts.include_stereo {
        assign_bond_directions(mol, &plan, bond_stereo_ok)
    } else {
        vec![0; mol.bond_count()]
    };

    let atom_token = |v: usize| -> String {
        let atom = mol.atom(v);
        let chiral = opts.include_stereo && chiral_ok[v] && atom.chirality != Chirality::None;
        let map = if opts.include_maps { atom.map_number } else { 0 };
        let symbol = if atom.aromatic {
            atom.element.symbol().to_ascii_lowercase()
        } else {
            atom.element.symbol().to_string()
        };
        let organic_ok = if atom.element == Element::WILDCARD {
            atom.explicit_h == 0
        } else {
            let (mut bv, mut ab) = (0u32, 0u32);
            for &(_, bi) in mol.neighbors(v) {
                match mol.bond(bi).order {
                    BondOrder::Aromatic => ab += 1,
                    o => bv += o.valence() as u32,
                }
            }
            implicit_hydrogens(atom.element, atom.aromatic, bv, ab) == Some(atom.explicit_h)
                && (!atom.aromatic || matches!(atom.element.atomic_number(), 5 | 6 | 7 | 8 | 15 | 16))
        };
        if organic_ok
            && !opts.force_brackets
            && !chiral
            && map == 0
            && atom.isotope == 0
            && atom.formal_charge == 0
        {
            return symbol;
        }
        let mut t = String::from("[");
        if atom.isotope != 0 {
            t.push_str(&atom.isotope.to_string());
        }
        t.push_str(&symbol);
        if chiral {
            let written = plan.written_neighbors(v, atom.explicit_h > 0);
            let mut reference = written.clone();
            reference.sort_unstable();
            let tag = atom.chirality.flipped_if(permutation_is_odd(&reference, &written));
            t.push_str(if tag == Chirality::Ccw { "@" } else { "@@" });
        }
        match atom.explicit_h {
            0 => {}
            1 => t.push('H'),
            h => t.push_str(&format!("H{h}")),
        }
        match atom.formal_charge {
            0 => {}
            1 => t.push('+'),
            -1 => t.push('-'),
            c if c > 0 => t.push_str(&format!("+{c}")),
            c => t.push_str(&format!("-{}", -c)),
        }
        if map != 0 {
            t.push_str(&format!(":{map}"));
        }
        t.push(']');
        t
    };
    let bond_token = |bi: usize, _first: usize| -> String {
        let b = mol.bond(bi);
        match b.order {
            BondOrder::Single => match bond_dirs[bi] {
                1 => "/".into(),
                -1 => "\\".into(),
                _ if mol.atom(b.a).aromatic && mol.atom(b.b).aromatic => "-".into(),
                _ => String::new(),
            },
            BondOrder::Double => "=".into(),
            BondOrder::Triple => "#".into(),
            BondOrder::Aromatic if b.in_ring => String::new(),
            BondOrder::Aromatic => ":".into(),
        }
    };
    render_plan(&plan, atom_token, bond_token)
}

/// Chooses `/` (+1) or `\` (-1) for single bonds so that every well-defined
/// double-bond configuration is reproduced. Symbols are relative to the
/// written direction (first emitted atom to second).
fn assign_bond_directions(mol: &Molecule, plan: &Plan, ok: &[bool]) -> Vec<i8> {
    let mut dirs = vec![0i8; mol.bond_count()];
    // constraints: (bond1, bond2, sign) meaning sym1 = sign * sym2
    let mut constraints: Vec<(usize, usize, i8)> = Vec::new();
    let mut stereo_bonds: Vec<usize> = (0..mol.bond_count())
        .filter(|&bi| ok[bi] && mol.bond(bi).stereo.is_some() && mol.bond(bi).order == BondOrder::Double)
        .collect();
    stereo_bonds.sort_by_key(|&bi| {
        let b = mol.bond(bi);
        plan.position[b.a].min(plan.position[b.b])
    });
    for bi in stereo_bonds {
        let b = mol.bond(bi);
        let stereo = b.stereo.expect("filtered");
        let pick = |end: usize, other: usize| -> Option<(usize, usize)> {
            mol.neighbors(end)
                .iter()
                .filter(|&&(j, e)| j != other && mol.bond(e).order == BondOrder::Single)
                .min_by_key(|&&(j, _)| plan.position[j])
                .copied()
        };
        let (p, q, ref_p, ref_q) = if plan.position[b.a] <= plan.position[b.b] {
            (b.a, b.b, stereo.ref_a, stereo.ref_b)
        } else {
            (b.b, b.a, stereo.ref_b, stereo.ref_a)
        };
        let (Some((x, ex)), Some((y, ey))) = (pick(p, q), pick(q, p)) else {
            continue;
        };
        let mut cis = stereo.cis;
        if x != ref_p {
            cis = !cis;
        }
        if y != ref_q {
            cis = !cis;
        }
        let sigma = |sub: usize, center: usize| -> i8 {
            if plan.position[sub] < plan.position[center] {
                1
            } else {
                -1
            }
        };
        let c = if cis { 1 } else { -1 };
        constraints.push((ex, ey, sigma(x, p) * sigma(y, q) * c));
    }
    for &(e1, e2, sign) in &constraints {
        match (dirs[e1], dirs[e2]) {
            (0, 0) => {
                dirs[e1] = 1;
                dirs[e2] = sign;
            }
            (d, 0) => dirs[e2] = sign * d,
            (0, d) => dirs[e1] = sign * d,
            _ => {}
        }
    }
    dirs
}

/// Writes SMILES. With `canonical`, the output depends only on the
/// molecular graph; otherwise atoms are visited in input order.
pub fn write_smiles(mol: &Molecule, canonical: bool) -> String {
    write_smiles_with(mol, canonical, WriteOptions::default())
}

pub(crate) fn write_smiles_with(mol: &Molecule, canonical: bool, opts: WriteOptions) -> String {
    if canonical {
        let canon = canonicalize(mol, opts.include_maps);
        write_with_priority(mol, &canon.ranks, &canon.chiral_ok, &canon.bond_stereo_ok, opts)
    } else {
        let priority: Vec<usize> = (0..mol.atom_count()).collect();
        let chiral_ok = vec![true; mol.atom_count()];
        let stereo_ok = vec![true; mol.bond_count()];
        write_with_priority(mol, &priority, &chiral_ok, &stereo_ok, opts)
    }
}

/// Canonical SMILES without atom-map numbers.
pub fn canonical_smiles_unmapped(mol: &Molecule) -> String {
    write_smiles_with(mol, true, WriteOptions { include_maps: false, ..WriteOptions::default() })
}

/// Non-canonical SMILES whose start atom and branch order come from a
/// generator seeded with `seed`.
pub fn randomize_traversal(mol: &Molecule, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut priority: Vec<usize> = (0..mol.atom_count()).collect();
    priority.shuffle(&mut rng);
    let chiral_ok = vec![true; mol.atom_count()];
    let stereo_ok = vec![true; mol.bond_count()];
    write_with_priority(mol, &priority, &chiral_ok, &stereo_ok, WriteOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;

    fn canon(s: &str) -> String {
        write_smiles(&parse_smiles(s).unwrap(), true)
    }

    #[test]
    fn simple_outputs() {
        assert_eq!(canon("C"), "C");
        assert_eq!(canon("OCC"), canon("CCO"));
        assert_eq!(canon("[NH4+]"), "[NH4+]");
        assert_eq!(write_smiles(&parse_smiles("CCO").unwrap(), false), "CCO");
    }

    #[test]
    fn ring_and_branch_round_trip() {
        for s in [
            "c1ccccc1C(=O)O",
            "C1CC2CCC1CC2",
            "CC(C)(C)OC(=O)N1CCC(CC1)C#N",
            "c1ccc2ccccc2c1",
            "O=C1CCCC(=O)N1",
            "C1CCCCCCCCCC2CCCCCCCCCC12",
        ] {
            let m = parse_smiles(s).unwrap();
            let out = write_smiles(&m, true);
            let back = parse_smiles(&out).unwrap();
            assert_eq!(back.element_multiset(), m.element_multiset(), "{s} -> {out}");
            assert_eq!(write_smiles(&back, true), out, "{s}");
        }
    }

    #[test]
    fn stereo_survives_canonicalization() {
        let l = canon("N[C@@H](C)C(=O)O");
        let d = canon("N[C@H](C)C(=O)O");
        assert_ne!(l, d);
        assert_eq!(l, canon("C[C@H](N)C(=O)O"));
        assert_eq!(l, canon("OC(=O)[C@@H](N)C"));
        let e = canon("F/C=C/F");
        let z = canon("F/C=C\\F");
        assert_ne!(e, z);
        assert_eq!(e, canon("F\\C=C\\F"));
        assert_eq!(z, canon("C(/F)=C/F"));
        assert_eq!(canon("F/C=C/Cl"), canon("C(=C/F)\\Cl"));
        assert_eq!(e, canon("C(\\F)=C/F"));
    }

    #[test]
    fn pseudo_stereo_is_dropped() {
        // two identical substituents: not a stereocenter
        assert_eq!(canon("C[C@H](C)O"), canon("CC(C)O"));
    }

    #[test]
    fn random_traversal_is_deterministic_and_valid() {
        let m = parse_smiles("c1ccccc1C(=O)O").unwrap();
        let a = randomize_traversal(&m, 7);
        assert_eq!(a, randomize_traversal(&m, 7));
        let back = parse_smiles(&a).unwrap();
        assert_eq!(write_smiles(&back, true), write_smiles(&m, true));
    }

    #[test]
    fn many_ring_digits_reuse() {
        let m = parse_smiles("C1CC1C1CC1C1CC1").unwrap();
        let s = write_smiles(&m, true);
        assert!(!s.contains('2'), "{s}");
    }
}
