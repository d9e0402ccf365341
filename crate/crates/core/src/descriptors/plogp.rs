//! Penalized logP: logP discounted by synthetic accessibility and oversized
//! rings, standardized against reference-corpus statistics.

use super::logp::logp;
use super::sa::{sa_score, FragmentTable};
use crate::graph::{ring_info, MolecularGraph};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

/// Reference-corpus normalization for the three p-logP components.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct CorpusStats {
    pub logp: MeanStd,
    pub sa: MeanStd,
    pub ring: MeanStd,
}

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("stats file malformed: {0}")]
    Malformed(String),
    #[error("standard deviation must be positive (got {0})")]
    NonPositiveStd(f64),
}

impl CorpusStats {
    /// Compute from a corpus with the given fragment table. Degenerate
    /// (zero-variance) components fall back to unit standard deviation.
    pub fn compute<'a, I>(corpus: I, table: &FragmentTable) -> CorpusStats
    where
        I: IntoIterator<Item = &'a MolecularGraph>,
    {
        let mut logps = Vec::new();
        let mut sas = Vec::new();
        let mut rings = Vec::new();
        for g in corpus {
            logps.push(logp(g));
            sas.push(sa_score(g, table));
            rings.push(ring_penalty(g));
        }
        CorpusStats {
            logp: mean_std(&logps),
            sa: mean_std(&sas),
            ring: mean_std(&rings),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize")
    }

    pub fn from_json(s: &str) -> Result<CorpusStats, StatsError> {
        let stats: CorpusStats =
            serde_json::from_str(s).map_err(|e| StatsError::Malformed(e.to_string()))?;
        for ms in [stats.logp, stats.sa, stats.ring] {
            if ms.std <= 0.0 {
                return Err(StatsError::NonPositiveStd(ms.std));
            }
        }
        Ok(stats)
    }
}

fn mean_std(xs: &[f64]) -> MeanStd {
    if xs.is_empty() {
        return MeanStd { mean: 0.0, std: 1.0 };
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    MeanStd {
        mean,
        std: if std > 1e-12 { std } else { 1.0 },
    }
}

/// Ring penalty: how far the largest ring exceeds six members.
pub fn ring_penalty(g: &MolecularGraph) -> f64 {
    let largest = ring_info(g).largest();
    (largest as f64 - 6.0).max(0.0)
}

/// Standardized penalized logP: z(logP) − z(SA) − z(ringPenalty).
pub fn penalized_logp(g: &MolecularGraph, table: &FragmentTable, stats: &CorpusStats) -> f64 {
    let z = |x: f64, ms: MeanStd| (x - ms.mean) / ms.std;
    z(logp(g), stats.logp) - z(sa_score(g, table), stats.sa) - z(ring_penalty(g), stats.ring)
}

/// Raw (unstandardized) variant: logP − SA − ringPenalty.
pub fn penalized_logp_raw(g: &MolecularGraph, table: &FragmentTable) -> f64 {
    logp(g) - sa_score(g, table) - ring_penalty(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_smiles;

    fn setup() -> (Vec<MolecularGraph>, FragmentTable) {
        let corpus: Vec<MolecularGraph> = [
            "CCO", "CCC", "CCN", "CCCC", "CC(C)O", "CCOC", "c1ccccc1", "Cc1ccccc1", "CCCCCC",
            "CCCCCCCC", "C1CCCCC1", "OC1CCCCC1",
        ]
        .iter()
        .map(|s| parse_smiles(s).unwrap())
        .collect();
        let table = FragmentTable::build(corpus.iter());
        (corpus, table)
    }

    #[test]
    fn alkane_extension_strictly_increases_plogp() {
        let (corpus, table) = setup();
        let stats = CorpusStats::compute(corpus.iter(), &table);
        let mut last = f64::NEG_INFINITY;
        for n in 10..=30 {
            let g = parse_smiles(&"C".repeat(n)).unwrap();
            let v = penalized_logp(&g, &table, &stats);
            assert!(v > last, "n={n}: {v} <= {last}");
            last = v;
        }
    }

    #[test]
    fn ring_penalty_values() {
        assert_eq!(ring_penalty(&parse_smiles("CCCC").unwrap()), 0.0);
        assert_eq!(ring_penalty(&parse_smiles("C1CCCCC1").unwrap()), 0.0);
        assert_eq!(
            ring_penalty(&parse_smiles(&format!("C1{}1", "C".repeat(9))).unwrap()),
            4.0
        );
    }

    #[test]
    fn finite_for_valid_molecules() {
        let (corpus, table) = setup();
        let stats = CorpusStats::compute(corpus.iter(), &table);
        for g in &corpus {
            assert!(penalized_logp(g, &table, &stats).is_finite());
        }
    }

    #[test]
    fn stats_json_roundtrip_and_validation() {
        let (corpus, table) = setup();
        let stats = CorpusStats::compute(corpus.iter(), &table);
        let back = CorpusStats::from_json(&stats.to_json()).unwrap();
        assert_eq!(stats, back);
        let bad = r#"{"logp":{"mean":0,"std":0},"sa":{"mean":0,"std":1},"ring":{"mean":0,"std":1}}"#;
        assert!(CorpusStats::from_json(bad).is_err());
    }
}
