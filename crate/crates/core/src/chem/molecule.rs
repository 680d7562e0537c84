use std::collections::HashSet;

use thiserror::Error;

use super::element::Element;
use super::rings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Contribution to the valence sum. Aromatic bonds count as one; the
    /// extra pi electron is accounted for per atom.
    pub fn valence(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    pub fn smiles_symbol(self) -> &'static str {
        match self {
            BondOrder::Single => "-",
            BondOrder::Double => "=",
            BondOrder::Triple => "#",
            BondOrder::Aromatic => ":",
        }
    }
}

/// Tetrahedral parity. The reference neighbor order is: the implicit
/// hydrogen first (when present), then neighbor atoms in ascending index
/// order. `Ccw` corresponds to SMILES `@` written in that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Chirality {
    #[default]
    None,
    Ccw,
    Cw,
}

impl Chirality {
    pub fn inverted(self) -> Chirality {
        match self {
            Chirality::None => Chirality::None,
            Chirality::Ccw => Chirality::Cw,
            Chirality::Cw => Chirality::Ccw,
        }
    }

    pub(crate) fn flipped_if(self, odd: bool) -> Chirality {
        if odd {
            self.inverted()
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub element: Element,
    pub isotope: u16,
    pub formal_charge: i8,
    pub aromatic: bool,
    /// Hydrogens attached to this atom that are not present as graph atoms.
    pub explicit_h: u8,
    pub map_number: u32,
    pub chirality: Chirality,
    pub in_ring: bool,
}

impl Atom {
    pub fn new(element: Element) -> Atom {
        Atom {
            element,
            isotope: 0,
            formal_charge: 0,
            aromatic: false,
            explicit_h: 0,
            map_number: 0,
            chirality: Chirality::None,
            in_ring: false,
        }
    }
}

/// Cis/trans configuration of a double bond, stated relative to one
/// reference neighbor on each end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BondStereo {
    /// Neighbor of `Bond::a` (other than `b`).
    pub ref_a: usize,
    /// Neighbor of `Bond::b` (other than `a`).
    pub ref_b: usize,
    pub cis: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
    pub in_ring: bool,
    pub stereo: Option<BondStereo>,
}

impl Bond {
    pub fn new(a: usize, b: usize, order: BondOrder) -> Bond {
        Bond { a, b, order, in_ring: false, stereo: None }
    }

    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("bond {0} references atom {1} which does not exist")]
    DanglingBond(usize, usize),
    #[error("self-loop on atom {0}")]
    SelfLoop(usize),
    #[error("parallel bonds between atoms {0} and {1}")]
    ParallelBond(usize, usize),
    #[error("aromatic bond {0}-{1} joins a non-aromatic atom")]
    AromaticBondNonAromaticAtom(usize, usize),
    #[error("aromatic atom {0} is not in a ring")]
    AromaticOutsideRing(usize),
    #[error("map number {0} used more than once")]
    DuplicateMap(u32),
}

/// An immutable, validated molecular graph. Ring membership flags and the
/// smallest set of smallest rings are computed on construction.
#[derive(Debug, Clone)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, usize)>>,
    rings: Vec<Vec<usize>>,
    source_text: String,
}

impl Molecule {
    pub fn from_parts(
        mut atoms: Vec<Atom>,
        mut bonds: Vec<Bond>,
        source_text: impl Into<String>,
    ) -> Result<Molecule, GraphError> {
        let n = atoms.len();
        let mut seen = HashSet::with_capacity(bonds.len());
        let mut adjacency = vec![Vec::new(); n];
        for (i, bond) in bonds.iter().enumerate() {
            if bond.a >= n {
                return Err(GraphError::DanglingBond(i, bond.a));
            }
            if bond.b >= n {
                return Err(GraphError::DanglingBond(i, bond.b));
            }
            if bond.a == bond.b {
                return Err(GraphError::SelfLoop(bond.a));
            }
            let key = (bond.a.min(bond.b), bond.a.max(bond.b));
            if !seen.insert(key) {
                return Err(GraphError::ParallelBond(key.0, key.1));
            }
            adjacency[bond.a].push((bond.b, i));
            adjacency[bond.b].push((bond.a, i));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let mut maps = HashSet::new();
        for atom in &atoms {
            if atom.map_number != 0 && !maps.insert(atom.map_number) {
                return Err(GraphError::DuplicateMap(atom.map_number));
            }
        }

        let edges: Vec<(usize, usize)> = bonds.iter().map(|b| (b.a, b.b)).collect();
        let rings = rings::sssr(n, &edges);
        for atom in atoms.iter_mut() {
            atom.in_ring = false;
        }
        for bond in bonds.iter_mut() {
            bond.in_ring = false;
        }
        for ring in &rings {
            for (k, &a) in ring.iter().enumerate() {
                let b = ring[(k + 1) % ring.len()];
                atoms[a].in_ring = true;
                if let Some(&(_, bi)) = adjacency[a].iter().find(|(nb, _)| *nb == b) {
                    bonds[bi].in_ring = true;
                }
            }
        }
        for bond in &bonds {
            if bond.order == BondOrder::Aromatic
                && !(atoms[bond.a].aromatic && atoms[bond.b].aromatic)
            {
                return Err(GraphError::AromaticBondNonAromaticAtom(bond.a, bond.b));
            }
        }
        if let Some(i) = atoms.iter().position(|a| a.aromatic && !a.in_ring) {
            return Err(GraphError::AromaticOutsideRing(i));
        }
        Ok(Molecule { atoms, bonds, adjacency, rings, source_text: source_text.into() })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn bond(&self, i: usize) -> &Bond {
        &self.bonds[i]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn source_text(&self) -> &str {
        &self.source_text
    }

    /// `(neighbor, bond index)` pairs sorted by neighbor index.
    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a].iter().find(|(nb, _)| *nb == b).map(|&(_, bi)| bi)
    }

    /// Hydrogen count including explicit hydrogen atoms bonded to `atom`.
    pub fn total_h(&self, atom: usize) -> u8 {
        let graph_h = self.adjacency[atom]
            .iter()
            .filter(|(nb, _)| self.atoms[*nb].element == Element::H)
            .count() as u8;
        self.atoms[atom].explicit_h + graph_h
    }

    /// Smallest set of smallest rings, each as a cycle of atom indices.
    pub fn rings(&self) -> &[Vec<usize>] {
        &self.rings
    }

    pub fn ring_count_of(&self, atom: usize) -> usize {
        self.rings.iter().filter(|r| r.contains(&atom)).count()
    }

    pub fn smallest_ring_size_of(&self, atom: usize) -> Option<usize> {
        self.rings.iter().filter(|r| r.contains(&atom)).map(Vec::len).min()
    }

    /// Sum of bond valences plus hydrogens.
    pub fn total_valence(&self, atom: usize) -> u32 {
        let bonds: u32 = self.adjacency[atom]
            .iter()
            .map(|&(_, bi)| self.bonds[bi].order.valence() as u32)
            .sum();
        bonds + self.atoms[atom].explicit_h as u32
    }

    /// Connected components as ascending atom-index lists, ordered by their
    /// smallest atom index.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.atoms.len();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut head = 0;
            while head < members.len() {
                let v = members[head];
                head += 1;
                for &(nb, _) in &self.adjacency[v] {
                    if comp[nb] == usize::MAX {
                        comp[nb] = id;
                        members.push(nb);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Topological (bond-count) distances from `source`; `None` for atoms in
    /// other components.
    pub fn distances_from(&self, source: usize) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.atoms.len()];
        dist[source] = Some(0);
        let mut queue = std::collections::VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap_or(0);
            for &(nb, _) in &self.adjacency[v] {
                if dist[nb].is_none() {
                    dist[nb] = Some(d + 1);
                    queue.push_back(nb);
                }
            }
        }
        dist
    }

    /// The sub-molecule induced by `keep` (in the given order). Hydrogen counts
    /// are preserved verbatim; stereo that references removed atoms is dropped.
    pub fn induced(&self, keep: &[usize]) -> Molecule {
        let mut index = vec![usize::MAX; self.atoms.len()];
        for (new, &old) in keep.iter().enumerate() {
            index[old] = new;
        }
        let mut atoms: Vec<Atom> = keep.iter().map(|&i| self.atoms[i].clone()).collect();
        for (new, &old) in keep.iter().enumerate() {
            let atom = &mut atoms[new];
            if atom.chirality == Chirality::None {
                continue;
            }
            let full: Vec<usize> = self.adjacency[old].iter().map(|&(nb, _)| nb).collect();
            if full.iter().any(|&nb| index[nb] == usize::MAX) {
                atom.chirality = Chirality::None;
                continue;
            }
            let before: Vec<usize> = full.iter().map(|&nb| index[nb]).collect();
            let mut after = before.clone();
            after.sort_unstable();
            atom.chirality = atom.chirality.flipped_if(permutation_is_odd(&before, &after));
        }
        let bonds = self
            .bonds
            .iter()
            .filter(|b| index[b.a] != usize::MAX && index[b.b] != usize::MAX)
            .map(|b| {
                let stereo = b.stereo.and_then(|s| {
                    (index[s.ref_a] != usize::MAX && index[s.ref_b] != usize::MAX).then(|| {
                        BondStereo { ref_a: index[s.ref_a], ref_b: index[s.ref_b], cis: s.cis }
                    })
                });
                Bond { a: index[b.a], b: index[b.b], order: b.order, in_ring: false, stereo }
            })
            .collect();
        Molecule::from_parts(atoms, bonds, String::new())
            .expect("induced subgraph of a valid molecule is valid")
    }

    /// A copy with the given map numbers (one per atom).
    pub fn with_map_numbers(&self, maps: &[u32]) -> Result<Molecule, GraphError> {
        let mut atoms = self.atoms.clone();
        for (atom, &m) in atoms.iter_mut().zip(maps) {
            atom.map_number = m;
        }
        Molecule::from_parts(atoms, self.bonds.clone(), self.source_text.clone())
    }

    pub fn without_map_numbers(&self) -> Molecule {
        let mut out = self.clone();
        for atom in &mut out.atoms {
            atom.map_number = 0;
        }
        out
    }

    pub fn element_multiset(&self) -> Vec<(Element, bool)> {
        let mut v: Vec<_> = self.atoms.iter().map(|a| (a.element, a.aromatic)).collect();
        v.sort_unstable();
        v
    }
}

/// Parity of the permutation taking `from` to `to`; both must contain the
/// same distinct elements.
pub(crate) fn permutation_is_odd<T: PartialEq + Copy>(from: &[T], to: &[T]) -> bool {
    let mut work: Vec<T> = from.to_vec();
    let mut swaps = 0usize;
    for i in 0..to.len() {
        if work[i] != to[i] {
            let j = (i + 1..work.len()).find(|&j| work[j] == to[i]).expect("not a permutation");
            work.swap(i, j);
            swaps += 1;
        }
    }
    swaps % 2 == 1
}

/// Implicit hydrogen count for an organic-subset atom written without
/// brackets. `bond_valence` sums non-aromatic bond orders, `aromatic_bonds`
/// counts aromatic bonds. Returns `None` when no allowed valence fits.
pub(crate) fn implicit_hydrogens(
    element: Element,
    aromatic: bool,
    bond_valence: u32,
    aromatic_bonds: u32,
) -> Option<u8> {
    let valences = element.default_valences()?;
    let pi = u32::from(aromatic && matches!(element.atomic_number(), 5 | 6 | 7 | 15));
    let used = bond_valence + aromatic_bonds + pi;
    match valences.iter().map(|&v| v as u32).find(|&v| v >= used) {
        Some(v) => Some((v - used) as u8),
        None if aromatic => Some(0),
        None => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn carbon() -> Atom {
        Atom::new(Element::C)
    }

    #[test]
    fn rejects_parallel_and_self_bonds() {
        let atoms = vec![carbon(), carbon()];
        let e = Molecule::from_parts(
            atoms.clone(),
            vec![Bond::new(0, 1, BondOrder::Single), Bond::new(1, 0, BondOrder::Double)],
            "",
        );
        assert_eq!(e.unwrap_err(), GraphError::ParallelBond(0, 1));
        let e = Molecule::from_parts(atoms, vec![Bond::new(1, 1, BondOrder::Single)], "");
        assert_eq!(e.unwrap_err(), GraphError::SelfLoop(1));
    }

    #[test]
    fn parity() {
        assert!(!permutation_is_odd(&[1, 2, 3], &[2, 3, 1]));
        assert!(permutation_is_odd(&[1, 2, 3], &[2, 1, 3]));
        assert!(!permutation_is_odd(&[4, 5], &[4, 5]));
    }

    #[test]
    fn implicit_h_rules() {
        assert_eq!(implicit_hydrogens(Element::C, false, 0, 0), Some(4));
        assert_eq!(implicit_hydrogens(Element::C, true, 0, 2), Some(1));
        assert_eq!(implicit_hydrogens(Element::N, true, 0, 2), Some(0));
        assert_eq!(implicit_hydrogens(Element::S, true, 0, 2), Some(0));
        assert_eq!(implicit_hydrogens(Element::S, false, 4, 0), Some(0));
        assert_eq!(implicit_hydrogens(Element::S, false, 3, 0), Some(1));
        assert_eq!(implicit_hydrogens(Element::C, false, 5, 0), None);
        assert_eq!(implicit_hydrogens(Element::from_symbol("Na").unwrap(), false, 0, 0), None);
    }
}
