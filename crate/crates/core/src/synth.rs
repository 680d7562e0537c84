//! Synthetic atom-mapped reaction corpora for fixtures, tests and benchmarks.
//!
//! Each reaction class is a mapped template whose `{Rn}` slots are filled
//! with substituents. Slot text is inserted verbatim on both sides, so its
//! atoms can be numbered consistently after parsing. Template atoms mapped
//! at 900 or above are leaving atoms; their maps are removed in the output.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chem::{parse_smiles, randomize_traversal, write_smiles, Molecule};
use crate::kb::CorpusRecord;
use crate::reaction::{parse_reaction, Reaction, ReactionError};

const LEAVING_MAP: u32 = 900;

/// A mapped reaction template with substituent slots `{R1}`, `{R2}`.
#[derive(Debug, Clone, Copy)]
pub struct ReactionClass {
    pub name: &'static str,
    pub reactants: &'static [&'static str],
    pub product: &'static str,
}

pub const REACTION_CLASSES: &[ReactionClass] = &[
    ReactionClass {
        name: "amide_coupling",
        reactants: &["[C:1]({R1})(=[O:2])[OH:901]", "[NH2:3]{R2}"],
        product: "[C:1]({R1})(=[O:2])[NH:3]{R2}",
    },
    ReactionClass {
        name: "esterification",
        reactants: &["[C:1]({R1})(=[O:2])[OH:901]", "[OH:3]{R2}"],
        product: "[C:1]({R1})(=[O:2])[O:3]{R2}",
    },
    ReactionClass {
        name: "amine_alkylation",
        reactants: &["[CH2:1]({R1})[Br:901]", "[NH2:2]{R2}"],
        product: "[CH2:1]({R1})[NH:2]{R2}",
    },
    ReactionClass {
        name: "williamson_ether",
        reactants: &["[CH2:1]({R1})[Cl:901]", "[OH:2]{R2}"],
        product: "[CH2:1]({R1})[O:2]{R2}",
    },
    ReactionClass {
        name: "suzuki_coupling",
        reactants: &[
            "[Br:901][c:1]%91[cH:2][cH:3][c:4]({R1})[cH:5][cH:6]%91",
            "[OH:902][B:903]([OH:904]){R2}",
        ],
        product: "[c:1]%91({R2})[cH:2][cH:3][c:4]({R1})[cH:5][cH:6]%91",
    },
    ReactionClass {
        name: "buchwald_amination",
        reactants: &["[Br:901][c:1]%91[cH:2][cH:3][c:4]({R1})[cH:5][cH:6]%91", "[NH2:7]{R2}"],
        product: "[c:1]%91([NH:7]{R2})[cH:2][cH:3][c:4]({R1})[cH:5][cH:6]%91",
    },
    ReactionClass {
        name: "reductive_amination",
        reactants: &["[CH:1]({R1})=[O:901]", "[NH2:2]{R2}"],
        product: "[CH2:1]({R1})[NH:2]{R2}",
    },
    ReactionClass {
        name: "boc_deprotection",
        reactants: &["[NH:1]({R1})[C:901](=[O:902])[O:903][C:904]([CH3:905])([CH3:906])[CH3:907]"],
        product: "[NH2:1]{R1}",
    },
    ReactionClass {
        name: "ester_hydrolysis",
        reactants: &["[C:1]({R1})(=[O:2])[O:901][CH3:902]", "[OH2:3]"],
        product: "[C:1]({R1})(=[O:2])[OH:3]",
    },
    ReactionClass {
        name: "nitro_reduction",
        reactants: &["[N+:1]({R1})(=[O:901])[O-:902]"],
        product: "[NH2:1]{R1}",
    },
    ReactionClass {
        name: "alcohol_oxidation",
        reactants: &["[CH2:1]({R1})[OH:2]"],
        product: "[CH:1]({R1})=[O:2]",
    },
    ReactionClass {
        name: "sulfonamide_formation",
        reactants: &["[S:1]({R1})(=[O:2])(=[O:3])[Cl:901]", "[NH2:4]{R2}"],
        product: "[S:1]({R1})(=[O:2])(=[O:3])[NH:4]{R2}",
    },
    ReactionClass {
        name: "organolithium_addition",
        reactants: &["[CH:1]({R1})=[O:2]", "[Li:901]{R2}"],
        product: "[CH:1]({R1})({R2})[OH:2]",
    },
    ReactionClass {
        name: "acid_chloride_esterification",
        reactants: &["[C:1]({R1})(=[O:2])[Cl:901]", "[OH:3]{R2}"],
        product: "[C:1]({R1})(=[O:2])[O:3]{R2}",
    },
    ReactionClass {
        name: "acid_chloride_amidation",
        reactants: &["[C:1]({R1})(=[O:2])[Cl:901]", "[NH2:3]{R2}"],
        product: "[C:1]({R1})(=[O:2])[NH:3]{R2}",
    },
    ReactionClass {
        name: "alkene_hydrogenation",
        reactants: &["[CH:1]({R1})=[CH2:2]", "[H][H]"],
        product: "[CH2:1]({R1})[CH3:2]",
    },
    ReactionClass {
        name: "ketone_reduction",
        reactants: &["[C:1]({R1})(=[O:2])[CH3:3]"],
        product: "[CH:1]({R1})([OH:2])[CH3:3]",
    },
    ReactionClass {
        name: "nitrile_hydration",
        reactants: &["[C:1]({R1})#[N:2]", "[OH2:3]"],
        product: "[C:1]({R1})(=[O:3])[NH2:2]",
    },
];

/// Substituents; the first atom is the attachment point.
pub const SUBSTITUENTS: &[&str] = &[
    "C",
    "CC",
    "C(C)C",
    "CCC",
    "C(C)(C)C",
    "C1CC1",
    "C1CCCCC1",
    "CC=C",
    "CC#C",
    "C(F)(F)F",
    "CCOC",
    "CCN(C)C",
    "CC(=O)OC",
    "CCC#N",
    "CCCl",
    "CCNC(=O)OC(C)(C)C",
    "c1ccccc1",
    "c1ccc(C#N)cc1",
    "c1ccc(Cl)cc1",
    "c1ccc(Br)cc1",
    "c1ccc(F)cc1",
    "c1ccc(OC)cc1",
    "c1ccc(C(F)(F)F)cc1",
    "c1ccc(C(=O)OC)cc1",
    "c1ccc([N+](=O)[O-])cc1",
    "c1ccc(O)cc1",
    "c1cc(F)cc(F)c1",
    "c1ccncc1",
    "c1ccco1",
    "c1ccsc1",
    "c1ccc2ccccc2c1",
    "c1ccc(S(=O)(=O)C)cc1",
    "c1ccc(C(C)=O)cc1",
    "c1cnc(N)nc1",
    "C1CCOC1",
    "C1CCN(C(=O)OC(C)(C)C)CC1",
    "Cc1ccccc1",
    "CCc1ccc(I)cc1",
    "CCSC",
    "CC(=O)N(C)C",
];

const REAGENTS: &[&str] = &["CCN(CC)CC", "ClCCl", "C1CCOC1", "O=C([O-])[O-].[K+].[K+]", "CN(C)C=O", "CS(C)=O"];

fn slot_atom_count(sub: &str) -> usize {
    parse_smiles(sub).map(|m| m.atom_count()).expect("substituents are valid SMILES")
}

/// Fills `template` and numbers slot atoms: slot `k` atom `j` gets map
/// `base[k] + j`. Returns the written molecule.
fn instantiate(template: &str, subs: &[&str], base: &[u32]) -> Result<Molecule, String> {
    let mut text = template.to_string();
    let mut order = Vec::new();
    let mut pos = 0;
    while let Some(start) = text[pos..].find("{R") {
        let start = pos + start;
        let end = start + text[start..].find('}').ok_or("unterminated slot")?;
        let k: usize = text[start + 2..end].parse().map_err(|_| "bad slot index")?;
        let k = k - 1;
        let sub = subs.get(k).ok_or("slot without substituent")?;
        text.replace_range(start..=end, sub);
        order.push(k);
        pos = start + sub.len();
    }
    let mol = parse_smiles(&text).map_err(|e| format!("{text}: {e}"))?;
    let mut maps: Vec<u32> = mol.atoms().iter().map(|a| a.map_number).collect();
    let mut free = maps.iter().enumerate().filter(|(_, &m)| m == 0).map(|(i, _)| i).collect::<Vec<_>>().into_iter();
    for k in order {
        for j in 0..slot_atom_count(subs[k]) {
            let i = free.next().ok_or("slot atoms out of step")?;
            maps[i] = base[k] + j as u32;
        }
    }
    for m in &mut maps {
        if *m >= LEAVING_MAP {
            *m = 0;
        }
    }
    mol.with_map_numbers(&maps).map_err(|e| e.to_string())
}

/// Mapped reaction SMILES for one class and substituent choice.
pub fn render_reaction(class: &ReactionClass, subs: &[&str], reagent: Option<&str>) -> Result<String, String> {
    let mut base = Vec::new();
    let mut next = 20u32;
    for s in subs {
        base.push(next);
        next += slot_atom_count(s) as u32;
    }
    let left: Vec<String> = class
        .reactants
        .iter()
        .map(|t| instantiate(t, subs, &base).map(|m| write_smiles(&m, false)))
        .collect::<Result<_, _>>()?;
    let right = write_smiles(&instantiate(class.product, subs, &base)?, false);
    Ok(format!("{}>{}>{}", left.join("."), reagent.unwrap_or(""), right))
}

/// `n` mapped reactions with document references `SYN-<index>`.
pub fn generate_corpus(n: usize, seed: u64) -> Vec<CorpusRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let class = REACTION_CLASSES.choose(&mut rng).expect("non-empty");
            let subs: Vec<&str> = (0..2).map(|_| *SUBSTITUENTS.choose(&mut rng).expect("non-empty")).collect();
            let reagent = if rng.gen_bool(0.3) { REAGENTS.choose(&mut rng).copied() } else { None };
            let reaction = render_reaction(class, &subs, reagent).expect("built-in templates are valid");
            CorpusRecord { line: i + 1, reaction, doc_ref: Some(format!("SYN-{i:06}")) }
        })
        .collect()
}

/// The same reaction with every molecule written from a random traversal
/// and map numbers relabeled by a random bijection.
pub fn permute_reaction(text: &str, seed: u64) -> Result<String, ReactionError> {
    let rxn = parse_reaction(text)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used: Vec<u32> = rxn
        .reactants
        .iter()
        .chain(&rxn.reagents)
        .chain(&rxn.products)
        .flat_map(|m| m.atoms().iter().map(|a| a.map_number))
        .filter(|&m| m != 0)
        .collect();
    used.sort_unstable();
    used.dedup();
    let mut targets: Vec<u32> = (1..=used.len() as u32 * 3).collect();
    targets.shuffle(&mut rng);
    let relabel = |m: u32| if m == 0 { 0 } else { targets[used.binary_search(&m).expect("collected")] };
    let mut write = |mols: &[Molecule]| -> Result<String, ReactionError> {
        let mut parts = Vec::new();
        for m in mols {
            let maps: Vec<u32> = m.atoms().iter().map(|a| relabel(a.map_number)).collect();
            let relabeled = m.with_map_numbers(&maps).map_err(|e| ReactionError::Map(e.to_string()))?;
            parts.push(randomize_traversal(&relabeled, rng.gen()));
        }
        parts.shuffle(&mut rng);
        Ok(parts.join("."))
    };
    let Reaction { reactants, reagents, products, .. } = &rxn;
    let l = write(reactants)?;
    let m = write(reagents)?;
    let r = write(products)?;
    Ok(format!("{l}>{m}>{r}"))
}
