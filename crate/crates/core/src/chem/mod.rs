//! Molecular graph kernel.

mod canon;
mod element;
mod matcher;
mod molecule;
pub mod rings;
mod smarts;
mod smiles;
mod writer;

pub use canon::canonical_ranks;
pub(crate) use canon::{
    bond_cis_relative_to, bond_label, break_ties, chirality_relative_to, dense_ranks,
    LabelledAdjacency,
};
pub use element::Element;
pub use matcher::{has_match_within, match_atom_sets, match_pattern};
pub use molecule::{Atom, Bond, BondOrder, BondStereo, Chirality, GraphError, Molecule};
pub use smarts::{
    parse_smarts, AtomExpr, AtomPrimitive, BondExpr, BondPrimitive, QueryBond, QueryPattern,
    SmartsError,
};
pub use smiles::{parse_smiles, SmilesError};
pub(crate) use writer::{render_plan, Plan};
pub use writer::{canonical_smiles_unmapped, randomize_traversal, write_smiles};

/// Smallest set of smallest rings of `mol`.
pub fn perceive_rings(mol: &Molecule) -> Vec<Vec<usize>> {
    mol.rings().to_vec()
}
