//! Few-shot prompt construction from the fixed retrosynthesis templates.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::chem::canonical_smiles_unmapped;
use crate::reaction::parse_reaction;

pub const FEWSHOT_COUNT: usize = 5;
const PLACEHOLDER: &str = "{{source}}";

const TEMPLATE_DATA: &str = include_str!("../../data/templates.tsv");

const TASK_HEADER: &str = "Task: You are an expert chemistry assistant. Propose reactants from which \
the given product can be synthesized in one step. Follow the answer format of the examples below; \
the SMILES of the final answer must be enclosed in <smiles>...</smiles> tags.";

/// The fifteen retrosynthesis question templates, in id order (1-based).
pub fn templates() -> Vec<&'static str> {
    TEMPLATE_DATA
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split_once('\t').map_or(l, |(_, t)| t))
        .collect()
}

/// Fills template `id` (1-based) with a product SMILES.
pub fn render_template(id: usize, product: &str) -> String {
    templates()[id - 1].replace(PLACEHOLDER, product)
}

pub fn wrap_smiles(smiles: &str) -> String {
    format!("<smiles>{smiles}</smiles>")
}

/// A (product, reactants) pair usable as a few-shot example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FewShotExample {
    pub product: String,
    pub reactants: String,
}

impl FewShotExample {
    /// Builds an example from reaction SMILES; atom maps are dropped and the
    /// largest product is kept.
    pub fn from_reaction(text: &str) -> Option<FewShotExample> {
        let rxn = parse_reaction(text).ok()?;
        let product = rxn.products.iter().max_by_key(|m| m.atom_count())?;
        let reactants: Vec<String> = rxn.reactants.iter().map(canonical_smiles_unmapped).collect();
        Some(FewShotExample { product: canonical_smiles_unmapped(product), reactants: reactants.join(".") })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub template_id: usize,
    /// (query, answer) pairs.
    pub fewshot: Vec<(String, String)>,
    pub target_smiles: String,
    pub rendered: String,
}

fn target_seed(target: &str, seed: u64) -> u64 {
    let digest = Sha256::new().chain_update(seed.to_le_bytes()).chain_update(target.as_bytes()).finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Deterministic in (target, seed, pool).
pub fn build_prompt(target: &str, pool: &[FewShotExample], seed: u64) -> Result<PromptSpec, HarnessError> {
    if pool.len() < FEWSHOT_COUNT {
        return Err(HarnessError::PoolTooSmall { have: pool.len(), need: FEWSHOT_COUNT });
    }
    let n_templates = templates().len();
    let mut rng = ChaCha8Rng::seed_from_u64(target_seed(target, seed));
    let picks = sample(&mut rng, pool.len(), FEWSHOT_COUNT);
    let fewshot: Vec<(String, String)> = picks
        .iter()
        .map(|i| {
            let ex = &pool[i];
            let t = rng.gen_range(1..=n_templates);
            (render_template(t, &ex.product), wrap_smiles(&ex.reactants))
        })
        .collect();
    let template_id = rng.gen_range(1..=n_templates);
    let mut rendered = String::new();
    rendered.push_str(TASK_HEADER);
    rendered.push_str("\n\n");
    for (q, a) in &fewshot {
        rendered.push_str(&format!("Query: {q}\nAnswer: {a}\n\n"));
    }
    rendered.push_str(&format!("Query: {}\n", render_template(template_id, target)));
    rendered.push_str("Return: reasoning, then the answer.\n");
    Ok(PromptSpec { template_id, fewshot, target_smiles: target.to_string(), rendered })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(n: usize) -> Vec<FewShotExample> {
        (0..n)
            .map(|i| FewShotExample { product: format!("C{}O", "C".repeat(i)), reactants: format!("C{}Br.O", "C".repeat(i)) })
            .collect()
    }

    #[test]
    fn fifteen_templates_with_placeholder() {
        let t = templates();
        assert_eq!(t.len(), 15);
        assert!(t.iter().all(|s| s.contains("<smiles>{{source}}</smiles>")));
        assert!(render_template(1, "CCO").starts_with("Based on the given product"));
    }

    #[test]
    fn deterministic_and_uses_whole_small_pool() {
        let p = pool(5);
        let a = build_prompt("c1ccccc1O", &p, 7).unwrap();
        assert_eq!(a, build_prompt("c1ccccc1O", &p, 7).unwrap());
        assert_eq!(a.fewshot.len(), 5);
        let mut answers: Vec<&String> = a.fewshot.iter().map(|(_, ans)| ans).collect();
        answers.sort();
        answers.dedup();
        assert_eq!(answers.len(), 5);
        assert!(a.rendered.contains("c1ccccc1O"));
        assert!(matches!(build_prompt("C", &pool(4), 1), Err(HarnessError::PoolTooSmall { .. })));
    }

    #[test]
    fn from_reaction_drops_maps() {
        let ex = FewShotExample::from_reaction("[CH3:1][OH:2].[CH3:5][C:3](=[O:4])O>>[CH3:1][O:2][C:3](=[O:4])[CH3:5]")
            .unwrap();
        assert!(!ex.product.contains(':'));
        assert_eq!(ex.reactants.matches('.').count(), 1);
    }
}
