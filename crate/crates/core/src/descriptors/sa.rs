//! Synthetic-accessibility scoring: corpus-frequency fragment term plus
//! structural complexity penalties, scaled to [1, 10] (lower = easier).

use super::fingerprint::atom_environments;
use crate::graph::{ring_info, MolecularGraph};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

pub const FRAGMENT_TABLE_VERSION: u32 = 1;
const ENV_RADIUS: u32 = 2;

/// Radius-2 environment frequencies over a reference corpus.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FragmentTable {
    pub version: u32,
    /// Total environment observations.
    pub total: u64,
    /// Highest single-environment count.
    pub max_count: u64,
    /// Environment hash (as decimal string for JSON friendliness) -> count;
    /// ordered so serialization is byte-stable across runs.
    pub counts: BTreeMap<String, u64>,
}

#[derive(Debug, Error)]
pub enum SaError {
    #[error("fragment table version {0} unsupported (expected {FRAGMENT_TABLE_VERSION})")]
    Version(u32),
    #[error("fragment table file malformed: {0}")]
    Malformed(String),
}

impl FragmentTable {
    pub fn build<'a, I>(corpus: I) -> FragmentTable
    where
        I: IntoIterator<Item = &'a MolecularGraph>,
    {
        let mut counts: HashMap<u64, u64> = HashMap::new();
        let mut total = 0u64;
        for g in corpus {
            let rounds = atom_environments(g, ENV_RADIUS);
            for &env in &rounds[ENV_RADIUS as usize] {
                *counts.entry(env).or_insert(0) += 1;
                total += 1;
            }
        }
        let max_count = counts.values().copied().max().unwrap_or(1);
        FragmentTable {
            version: FRAGMENT_TABLE_VERSION,
            total,
            max_count,
            counts: counts
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("table serializes")
    }

    pub fn from_json(s: &str) -> Result<FragmentTable, SaError> {
        let t: FragmentTable =
            serde_json::from_str(s).map_err(|e| SaError::Malformed(e.to_string()))?;
        if t.version != FRAGMENT_TABLE_VERSION {
            return Err(SaError::Version(t.version));
        }
        Ok(t)
    }

    fn count(&self, env: u64) -> u64 {
        self.counts.get(&env.to_string()).copied().unwrap_or(0)
    }
}

// raw-score window mapped onto the [1, 10] scale; fixed constants calibrated
// once on a drug-like reference corpus
const RAW_LO: f64 = 1.0;
const RAW_HI: f64 = 11.0;

/// Fragment-rarity term (mean negated log-frequency of radius-2 environments
/// relative to the most common one) plus size, macrocycle and ring-density
/// penalties, affinely mapped to [1, 10].
pub fn sa_score(g: &MolecularGraph, table: &FragmentTable) -> f64 {
    if g.atom_count() == 0 {
        return 1.0;
    }
    let rounds = atom_environments(g, ENV_RADIUS);
    let envs = &rounds[ENV_RADIUS as usize];
    let rarity: f64 = envs
        .iter()
        .map(|&e| {
            let c = table.count(e) as f64;
            // unseen environments get a half count
            -((c + 0.5) / table.max_count as f64).ln()
        })
        .sum::<f64>()
        / envs.len() as f64;

    let n = g.atom_count() as f64;
    let size_penalty = n.powf(1.005) - n;
    let rings = ring_info(g);
    let macro_penalty = (1.0 + rings.rings.iter().filter(|r| r.len() > 8).count() as f64).ln();
    let ring_penalty = 0.1 * (1.0 + rings.count() as f64).ln();

    let raw = rarity + size_penalty + macro_penalty + ring_penalty;
    1.0 + 9.0 * ((raw - RAW_LO) / (RAW_HI - RAW_LO)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_smiles;

    fn toy_table() -> FragmentTable {
        let corpus: Vec<MolecularGraph> = [
            "CCO", "CCC", "CCN", "CCCC", "CC(C)O", "CCOC", "c1ccccc1", "Cc1ccccc1", "CCCO",
            "CC(C)C", "CCOCC", "OCCO",
        ]
        .iter()
        .map(|s| parse_smiles(s).unwrap())
        .collect();
        FragmentTable::build(corpus.iter())
    }

    #[test]
    fn common_molecule_easier_than_macrocycle() {
        let t = toy_table();
        let ethanol = parse_smiles("CCO").unwrap();
        let macrocycle = parse_smiles(&format!("C1{}1", "C".repeat(14))).unwrap();
        assert!(sa_score(&ethanol, &t) < sa_score(&macrocycle, &t));
    }

    #[test]
    fn score_stays_in_range() {
        let t = toy_table();
        for smi in ["C", "CCO", "c1ccc2ccccc2c1", "N#CC(Br)(I)C1CCC1SSP"] {
            let s = sa_score(&parse_smiles(smi).unwrap(), &t);
            assert!((1.0..=10.0).contains(&s), "{smi}: {s}");
        }
    }

    #[test]
    fn deterministic() {
        let t = toy_table();
        let g = parse_smiles("CC(C)Cc1ccc(C(C)C(=O)O)cc1").unwrap();
        assert_eq!(sa_score(&g, &t), sa_score(&g, &t));
    }

    #[test]
    fn table_json_roundtrip() {
        let t = toy_table();
        let back = FragmentTable::from_json(&t.to_json()).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn version_mismatch_rejected() {
        let mut t = toy_table();
        t.version = 99;
        assert!(FragmentTable::from_json(&t.to_json()).is_err());
    }
}
