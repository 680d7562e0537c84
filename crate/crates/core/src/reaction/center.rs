//! Reaction-center extraction at five context levels, canonical keys and
//! functional-group signatures.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::chem::{
    bond_cis_relative_to, bond_label, break_ties, canonical_ranks, chirality_relative_to,
    dense_ranks, render_plan, rings::cyclic_edges, BondOrder, Chirality, LabelledAdjacency,
    Molecule, Plan,
};

use super::dynamic::{detect_dynamic_atoms, DynamicAtomSet};
use super::fg::{FgLibrary, FgSignature};
use super::model::{Reaction, ReactionError, Side};

pub const LEVELS: u8 = 5;
const CORRESPONDENCE: u32 = 16;

/// Atom selection of one context level, with its canonical key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RcPattern {
    pub level: u8,
    /// (reactant index, atom index)
    pub left_atoms: BTreeSet<(usize, usize)>,
    /// (product index, atom index)
    pub right_atoms: BTreeSet<(usize, usize)>,
    pub canonical_key: String,
}

impl RcPattern {
    pub fn atoms(&self, side: Side) -> &BTreeSet<(usize, usize)> {
        match side {
            Side::Left => &self.left_atoms,
            Side::Right => &self.right_atoms,
        }
    }
}

/// All five levels of one reaction, with the signature at each level.
#[derive(Debug, Clone)]
pub struct RcHierarchy {
    pub dynamic: DynamicAtomSet,
    pub levels: Vec<RcPattern>,
    pub signatures: Vec<FgSignature>,
}

impl RcHierarchy {
    pub fn level(&self, level: u8) -> &RcPattern {
        &self.levels[level as usize - 1]
    }

    pub fn signature(&self, level: u8) -> &FgSignature {
        &self.signatures[level as usize - 1]
    }
}

struct MolInfo {
    dynamic: Vec<bool>,
    /// Bond distance to the nearest dynamic atom (`u32::MAX` if none).
    dist: Vec<u32>,
    fg: Vec<(usize, Vec<usize>)>,
}

struct Context<'a> {
    rxn: &'a Reaction,
    info: [Vec<MolInfo>; 2],
}

type Selection = [Vec<Vec<bool>>; 2];

const SIDES: [Side; 2] = [Side::Left, Side::Right];

fn multi_source_distances(mol: &Molecule, sources: &[bool]) -> Vec<u32> {
    let mut dist = vec![u32::MAX; mol.atom_count()];
    let mut queue = std::collections::VecDeque::new();
    for (i, &s) in sources.iter().enumerate() {
        if s {
            dist[i] = 0;
            queue.push_back(i);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &(w, _) in mol.neighbors(v) {
            if dist[w] == u32::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

impl<'a> Context<'a> {
    fn new(rxn: &'a Reaction, dynamic: &DynamicAtomSet, library: &FgLibrary) -> Context<'a> {
        let build = |mols: &[Molecule]| -> Vec<MolInfo> {
            mols.iter()
                .map(|mol| {
                    let dynamic: Vec<bool> = mol
                        .atoms()
                        .iter()
                        .map(|a| a.map_number != 0 && dynamic.map_numbers.contains(&a.map_number))
                        .collect();
                    let dist = multi_source_distances(mol, &dynamic);
                    MolInfo { dynamic, dist, fg: library.matches_in(mol) }
                })
                .collect()
        };
        Context { rxn, info: [build(&rxn.reactants), build(&rxn.products)] }
    }

    fn mols(&self, s: usize) -> &[Molecule] {
        self.rxn.side(SIDES[s])
    }

    fn empty_selection(&self) -> Selection {
        [0, 1].map(|s| self.mols(s).iter().map(|m| vec![false; m.atom_count()]).collect())
    }

    /// Adds every atom whose map number is selected on either side.
    fn symmetrize(&self, sel: &mut Selection) {
        let mut maps = HashSet::new();
        for s in 0..2 {
            for (mi, mol) in self.mols(s).iter().enumerate() {
                for (ai, atom) in mol.atoms().iter().enumerate() {
                    if sel[s][mi][ai] && atom.map_number != 0 {
                        maps.insert(atom.map_number);
                    }
                }
            }
        }
        for s in 0..2 {
            for (mi, mol) in self.mols(s).iter().enumerate() {
                for (ai, atom) in mol.atoms().iter().enumerate() {
                    if atom.map_number != 0 && maps.contains(&atom.map_number) {
                        sel[s][mi][ai] = true;
                    }
                }
            }
        }
    }

    fn add_shell(&self, sel: &mut Selection, radius: u32) {
        for s in 0..2 {
            for (mi, info) in self.info[s].iter().enumerate() {
                for (ai, &d) in info.dist.iter().enumerate() {
                    if d <= radius {
                        sel[s][mi][ai] = true;
                    }
                }
            }
        }
    }

    fn levels(&self) -> Vec<Selection> {
        let mut out = Vec::with_capacity(LEVELS as usize);
        let mut sel = self.empty_selection();

        // L1: dynamic atoms, first shell, FGs touching a dynamic atom, unmapped atoms
        self.add_shell(&mut sel, 1);
        for s in 0..2 {
            for (mi, mol) in self.mols(s).iter().enumerate() {
                let info = &self.info[s][mi];
                for (fg_atoms_dyn, set) in info.fg.iter().map(|(_, set)| (set.iter().any(|&a| info.dynamic[a]), set)) {
                    if fg_atoms_dyn {
                        for &a in set {
                            sel[s][mi][a] = true;
                        }
                    }
                }
                for (ai, atom) in mol.atoms().iter().enumerate() {
                    if atom.map_number == 0 {
                        sel[s][mi][ai] = true;
                    }
                }
            }
        }
        self.symmetrize(&mut sel);
        out.push(sel.clone());

        // L2: second shell, rings holding a dynamic atom, stereo atoms next to L1
        let prev = sel.clone();
        self.add_shell(&mut sel, 2);
        for s in 0..2 {
            for (mi, mol) in self.mols(s).iter().enumerate() {
                let info = &self.info[s][mi];
                for ring in mol.rings() {
                    if ring.iter().any(|&a| info.dynamic[a]) {
                        for &a in ring {
                            sel[s][mi][a] = true;
                        }
                    }
                }
                let mut stereo = vec![false; mol.atom_count()];
                for (ai, atom) in mol.atoms().iter().enumerate() {
                    stereo[ai] = atom.chirality != Chirality::None;
                }
                for b in mol.bonds() {
                    if b.stereo.is_some() {
                        stereo[b.a] = true;
                        stereo[b.b] = true;
                    }
                }
                for ai in 0..mol.atom_count() {
                    if stereo[ai]
                        && (prev[s][mi][ai] || mol.neighbors(ai).iter().any(|&(j, _)| prev[s][mi][j]))
                    {
                        sel[s][mi][ai] = true;
                    }
                }
            }
        }
        self.symmetrize(&mut sel);
        out.push(sel.clone());

        // L3: third shell, rings fused to rings already inside
        let prev = sel.clone();
        self.add_shell(&mut sel, 3);
        for s in 0..2 {
            for (mi, mol) in self.mols(s).iter().enumerate() {
                let inside: Vec<&Vec<usize>> =
                    mol.rings().iter().filter(|r| r.iter().all(|&a| prev[s][mi][a])).collect();
                for ring in mol.rings() {
                    let fused = inside
                        .iter()
                        .any(|r| *r != ring && ring.iter().filter(|a| r.contains(a)).count() >= 2);
                    if fused {
                        for &a in ring {
                            sel[s][mi][a] = true;
                        }
                    }
                }
            }
        }
        self.symmetrize(&mut sel);
        out.push(sel.clone());

        // L4: fourth shell, first substituent atoms of included aromatic rings
        let prev = sel.clone();
        self.add_shell(&mut sel, 4);
        for s in 0..2 {
            for (mi, mol) in self.mols(s).iter().enumerate() {
                let info = &self.info[s][mi];
                let mut substituents = BTreeSet::new();
                for ring in mol.rings() {
                    let aromatic = ring.iter().all(|&a| mol.atom(a).aromatic);
                    if !aromatic || !ring.iter().all(|&a| prev[s][mi][a]) {
                        continue;
                    }
                    for &a in ring {
                        for &(j, _) in mol.neighbors(a) {
                            if !ring.contains(&j) {
                                substituents.insert(j);
                            }
                        }
                    }
                }
                for &a in &substituents {
                    sel[s][mi][a] = true;
                }
                for (_, set) in &info.fg {
                    if set.iter().any(|a| substituents.contains(a)) {
                        for &a in set {
                            sel[s][mi][a] = true;
                        }
                    }
                }
            }
        }
        self.symmetrize(&mut sel);
        out.push(sel.clone());

        // L5: fifth shell
        self.add_shell(&mut sel, 5);
        self.symmetrize(&mut sel);
        out.push(sel);
        out
    }

    fn signature(&self, sel: &Selection, width: usize) -> FgSignature {
        let mut sig = FgSignature::new(width);
        for s in 0..2 {
            for (mi, info) in self.info[s].iter().enumerate() {
                for (id, set) in &info.fg {
                    if !sig.get(*id) && set.iter().all(|&a| !sel[s][mi][a]) {
                        sig.set(*id);
                    }
                }
            }
        }
        sig
    }

    fn pattern(&self, level: u8, sel: &Selection) -> RcPattern {
        let collect = |s: usize| -> BTreeSet<(usize, usize)> {
            sel[s]
                .iter()
                .enumerate()
                .flat_map(|(mi, atoms)| atoms.iter().enumerate().filter(|(_, &x)| x).map(move |(ai, _)| (mi, ai)))
                .collect()
        };
        let left_atoms = collect(0);
        let right_atoms = collect(1);
        let canonical_key = self.key(level, &left_atoms, &right_atoms);
        RcPattern { level, left_atoms, right_atoms, canonical_key }
    }

    fn key(&self, level: u8, left: &BTreeSet<(usize, usize)>, right: &BTreeSet<(usize, usize)>) -> String {
        KeyWriter::new(self, level, [left, right]).write()
    }
}

/// Joint left/right pattern graph used for canonical serialization.
struct KeyWriter<'c, 'a> {
    ctx: &'c Context<'a>,
    level: u8,
    /// node → (side, molecule, atom)
    nodes: Vec<(usize, usize, usize)>,
    index: BTreeMap<(usize, usize, usize), usize>,
    ranks: Vec<u32>,
    in_ring: Vec<bool>,
    counterpart: Vec<Option<usize>>,
    mol_ranks: [Vec<Option<Vec<usize>>>; 2],
}

impl<'c, 'a> KeyWriter<'c, 'a> {
    fn new(ctx: &'c Context<'a>, level: u8, sets: [&BTreeSet<(usize, usize)>; 2]) -> Self {
        let mut nodes = Vec::new();
        for s in 0..2 {
            for &(m, a) in sets[s] {
                nodes.push((s, m, a));
            }
        }
        let index: BTreeMap<_, _> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let n = nodes.len();

        let mut edges: Vec<(usize, usize)> = Vec::new();
        let mut adj: LabelledAdjacency = vec![Vec::new(); n];
        for (i, &(s, m, a)) in nodes.iter().enumerate() {
            let mol = &ctx.mols(s)[m];
            for &(j, bi) in mol.neighbors(a) {
                if let Some(&k) = index.get(&(s, m, j)) {
                    adj[i].push((k, bond_label(mol.bond(bi).order)));
                    if i < k {
                        edges.push((i, k));
                    }
                }
            }
        }
        let cyclic = cyclic_edges(n, &edges);
        let mut in_ring = vec![false; n];
        for (&(i, k), &c) in edges.iter().zip(&cyclic) {
            if c {
                in_ring[i] = true;
                in_ring[k] = true;
            }
        }

        let mut by_map: BTreeMap<u32, [Option<usize>; 2]> = BTreeMap::new();
        for (i, &(s, m, a)) in nodes.iter().enumerate() {
            let map = ctx.mols(s)[m].atom(a).map_number;
            if map != 0 {
                by_map.entry(map).or_default()[s] = Some(i);
            }
        }
        let mut counterpart = vec![None; n];
        for pair in by_map.values() {
            if let [Some(l), Some(r)] = *pair {
                counterpart[l] = Some(r);
                counterpart[r] = Some(l);
                adj[l].push((r, CORRESPONDENCE));
                adj[r].push((l, CORRESPONDENCE));
            }
        }

        let invariants: Vec<(usize, u8, bool, i8, bool, bool, u8, bool)> = nodes
            .iter()
            .enumerate()
            .map(|(i, &(s, m, a))| {
                let mol = &ctx.mols(s)[m];
                let atom = mol.atom(a);
                let dynamic = ctx.info[s][m].dynamic[a];
                (
                    s,
                    atom.element.atomic_number(),
                    atom.aromatic,
                    atom.formal_charge,
                    in_ring[i],
                    dynamic,
                    if dynamic { mol.total_h(a) } else { u8::MAX },
                    counterpart[i].is_some(),
                )
            })
            .collect();
        let ranks = break_ties(dense_ranks(&invariants), &adj);
        let mol_ranks = [0, 1].map(|s| vec![None; ctx.mols(s).len()]);
        KeyWriter { ctx, level, nodes, index, ranks, in_ring, counterpart, mol_ranks }
    }

    /// Orders neighbors of an atom: pattern atoms by joint rank, then the
    /// rest by their canonical rank within the molecule.
    fn neighbor_key(&mut self, s: usize, m: usize, atom: usize) -> (u8, u32) {
        match self.index.get(&(s, m, atom)) {
            Some(&i) => (0, self.ranks[i]),
            None => {
                let mol = &self.ctx.mols(s)[m];
                let ranks = self.mol_ranks[s][m].get_or_insert_with(|| canonical_ranks(mol));
                (1, ranks[atom] as u32)
            }
        }
    }

    fn side_text(&mut self, s: usize, ids: &mut BTreeMap<usize, usize>) -> String {
        // group nodes by molecule
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &(ns, m, _)) in self.nodes.iter().enumerate() {
            if ns == s {
                groups.entry(m).or_default().push(i);
            }
        }
        let mut ordered: Vec<(u32, usize, Vec<usize>)> = groups
            .into_iter()
            .map(|(m, members)| (members.iter().map(|&i| self.ranks[i]).min().unwrap_or(0), m, members))
            .collect();
        ordered.sort();
        let mut parts = Vec::new();
        for (_, m, members) in ordered {
            parts.push(self.molecule_text(s, m, &members, ids).replace('.', ","));
        }
        parts.join(".")
    }

    fn molecule_text(&mut self, s: usize, m: usize, members: &[usize], ids: &mut BTreeMap<usize, usize>) -> String {
        let ctx = self.ctx;
        let mol = &ctx.mols(s)[m];
        let local: BTreeMap<usize, usize> =
            members.iter().enumerate().map(|(li, &node)| (self.nodes[node].2, li)).collect();
        let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); members.len()];
        for (li, &node) in members.iter().enumerate() {
            let a = self.nodes[node].2;
            for &(j, bi) in mol.neighbors(a) {
                if let Some(&lj) = local.get(&j) {
                    adjacency[li].push((lj, bi));
                }
            }
        }
        let priority: Vec<usize> = members.iter().map(|&i| self.ranks[i] as usize).collect();
        let plan = Plan::new(&adjacency, &priority);

        let stereo = self.level >= 2;
        let mut chiral: Vec<Option<Chirality>> = vec![None; members.len()];
        let mut cis: BTreeMap<usize, bool> = BTreeMap::new();
        if stereo {
            for (li, &node) in members.iter().enumerate() {
                let a = self.nodes[node].2;
                if mol.atom(a).chirality != Chirality::None {
                    let keys: BTreeMap<usize, (u8, u32)> = mol
                        .neighbors(a)
                        .iter()
                        .map(|&(j, _)| (j, self.neighbor_key(s, m, j)))
                        .collect();
                    chiral[li] = chirality_relative_to(mol, a, |j| keys[&j]);
                }
            }
            for adj in &adjacency {
                for &(_, bi) in adj {
                    let b = mol.bond(bi);
                    if b.stereo.is_none() || cis.contains_key(&bi) {
                        continue;
                    }
                    let mut keys = BTreeMap::new();
                    for end in [b.a, b.b] {
                        for &(j, _) in mol.neighbors(end) {
                            keys.insert(j, self.neighbor_key(s, m, j));
                        }
                    }
                    if let Some(c) = bond_cis_relative_to(mol, bi, |j| keys[&j]) {
                        cis.insert(bi, c);
                    }
                }
            }
        }

        let nodes = &self.nodes;
        let in_ring = &self.in_ring;
        let counterpart = &self.counterpart;
        let info = &ctx.info[s][m];
        render_plan(
            &plan,
            |li| {
                let node = members[li];
                let a = nodes[node].2;
                let atom = mol.atom(a);
                let mut t = String::from("[");
                if atom.aromatic {
                    t.push_str(&atom.element.symbol().to_ascii_lowercase());
                } else {
                    t.push_str(atom.element.symbol());
                }
                t.push_str(if in_ring[node] { ";R" } else { ";!R" });
                if atom.formal_charge != 0 {
                    t.push_str(&format!(";{:+}", atom.formal_charge));
                }
                if info.dynamic[a] {
                    t.push_str(&format!(";H{};dyn", mol.total_h(a)));
                }
                match chiral[li] {
                    Some(Chirality::Ccw) => t.push_str(";@"),
                    Some(Chirality::Cw) => t.push_str(";@@"),
                    _ => {}
                }
                if let Some(other) = counterpart[node] {
                    let key = if s == 0 { node } else { other };
                    let next = ids.len() + 1;
                    let id = *ids.entry(key).or_insert(next);
                    t.push_str(&format!(":{id}"));
                }
                t.push(']');
                t
            },
            |bi, _| {
                let order = mol.bond(bi).order;
                let mut t = String::from(match order {
                    BondOrder::Single => "-",
                    BondOrder::Double => "=",
                    BondOrder::Triple => "#",
                    BondOrder::Aromatic => ":",
                });
                match cis.get(&bi) {
                    Some(true) => t.push('Z'),
                    Some(false) => t.push('E'),
                    None => {}
                }
                t
            },
        )
    }

    fn write(mut self) -> String {
        let mut ids = BTreeMap::new();
        let left = self.side_text(0, &mut ids);
        let right = self.side_text(1, &mut ids);
        format!("L{}|{}>>{}", self.level, left, right)
    }
}

/// Computes all five levels, their keys and signatures.
pub fn analyze_reaction(rxn: &Reaction, library: &FgLibrary) -> Result<RcHierarchy, ReactionError> {
    let dynamic = detect_dynamic_atoms(rxn)?;
    let ctx = Context::new(rxn, &dynamic, library);
    let selections = ctx.levels();
    let levels: Vec<RcPattern> =
        selections.iter().enumerate().map(|(i, sel)| ctx.pattern(i as u8 + 1, sel)).collect();
    let signatures = selections.iter().map(|sel| ctx.signature(sel, library.len())).collect();
    Ok(RcHierarchy { dynamic, levels, signatures })
}

fn check_level(level: u8) -> Result<(), ReactionError> {
    if (1..=LEVELS).contains(&level) {
        Ok(())
    } else {
        Err(ReactionError::BadLevel(level))
    }
}

/// The reaction center at one level.
pub fn extract_rc(rxn: &Reaction, level: u8, library: &FgLibrary) -> Result<RcPattern, ReactionError> {
    check_level(level)?;
    let dynamic = detect_dynamic_atoms(rxn)?;
    let ctx = Context::new(rxn, &dynamic, library);
    let selections = ctx.levels();
    Ok(ctx.pattern(level, &selections[level as usize - 1]))
}

fn selection_of(ctx: &Context, rc: &RcPattern) -> Selection {
    let mut sel = ctx.empty_selection();
    for (s, side) in SIDES.iter().enumerate() {
        for &(m, a) in rc.atoms(*side) {
            sel[s][m][a] = true;
        }
    }
    sel
}

/// Canonical key of an atom selection (recomputed from the atom sets).
pub fn rc_canonical_key(rxn: &Reaction, rc: &RcPattern, library: &FgLibrary) -> Result<String, ReactionError> {
    check_level(rc.level)?;
    let dynamic = detect_dynamic_atoms(rxn)?;
    let ctx = Context::new(rxn, &dynamic, library);
    Ok(ctx.key(rc.level, &rc.left_atoms, &rc.right_atoms))
}

/// Library FGs with a match (in a reactant or product) disjoint from the
/// reaction-center atoms.
pub fn compute_fg_signature(
    rxn: &Reaction,
    rc: &RcPattern,
    library: &FgLibrary,
) -> Result<FgSignature, ReactionError> {
    let dynamic = detect_dynamic_atoms(rxn)?;
    let ctx = Context::new(rxn, &dynamic, library);
    let sel = selection_of(&ctx, rc);
    Ok(ctx.signature(&sel, library.len()))
}
