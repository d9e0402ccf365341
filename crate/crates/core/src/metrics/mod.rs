//! Distribution-learning evaluation: Validity, Frag, Scaf, SNN, IntDiv,
//! Novelty (FCD is deliberately absent — it needs a pretrained external
//! network) plus the substructure attention level.

mod sal;

pub use sal::{quartiles, sal, Quartiles, SalError, SubstructureAnnotation};

use crate::descriptors::{fragments, morgan_default, scaffold_key, tanimoto, Fingerprint};
use crate::graph::{canonical_key, validate, MolecularGraph};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("metric {0} requires a non-empty set")]
    EmptySet(&'static str),
    #[error("internal diversity requires at least two molecules")]
    SingletonSet,
}

/// Fraction of generation attempts that produced valid connected molecules.
/// `gen` carries one entry per attempt: `Some(graph)` for parse/decode
/// successes, `None` for failures.
pub fn validity(gen: &[Option<MolecularGraph>]) -> Result<f64, MetricError> {
    if gen.is_empty() {
        return Err(MetricError::EmptySet("validity"));
    }
    let ok = gen
        .iter()
        .filter(|g| {
            g.as_ref()
                .is_some_and(|g| validate(g).valid && g.is_connected())
        })
        .count();
    Ok(ok as f64 / gen.len() as f64)
}

fn cosine(a: &HashMap<String, usize>, b: &HashMap<String, usize>) -> f64 {
    let keys: HashSet<&String> = a.keys().chain(b.keys()).collect();
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for k in keys {
        let x = *a.get(k).unwrap_or(&0) as f64;
        let y = *b.get(k).unwrap_or(&0) as f64;
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na.sqrt() * nb.sqrt())
}

fn fragment_counts(set: &[MolecularGraph]) -> HashMap<String, usize> {
    let maps: Vec<HashMap<String, usize>> = set
        .par_iter()
        .map(|g| fragments(g).counts)
        .collect();
    let mut total = HashMap::new();
    for m in maps {
        for (k, v) in m {
            *total.entry(k).or_insert(0) += v;
        }
    }
    total
}

fn scaffold_counts(set: &[MolecularGraph]) -> HashMap<String, usize> {
    let keys: Vec<String> = set.par_iter().map(scaffold_key).collect();
    let mut total = HashMap::new();
    for k in keys {
        *total.entry(k).or_insert(0) += 1;
    }
    total
}

/// Cosine similarity between fragment-count vectors of the two sets.
pub fn frag(gen: &[MolecularGraph], reference: &[MolecularGraph]) -> Result<f64, MetricError> {
    if gen.is_empty() || reference.is_empty() {
        return Err(MetricError::EmptySet("frag"));
    }
    Ok(cosine(&fragment_counts(gen), &fragment_counts(reference)))
}

/// Cosine similarity between Bemis–Murcko scaffold frequencies.
pub fn scaf(gen: &[MolecularGraph], reference: &[MolecularGraph]) -> Result<f64, MetricError> {
    if gen.is_empty() || reference.is_empty() {
        return Err(MetricError::EmptySet("scaf"));
    }
    Ok(cosine(&scaffold_counts(gen), &scaffold_counts(reference)))
}

pub fn fingerprints(set: &[MolecularGraph]) -> Vec<Fingerprint> {
    set.par_iter().map(morgan_default).collect()
}

/// Mean over generated molecules of the Tanimoto similarity to the nearest
/// reference molecule.
pub fn snn_fp(gen: &[Fingerprint], reference: &[Fingerprint]) -> Result<f64, MetricError> {
    if gen.is_empty() || reference.is_empty() {
        return Err(MetricError::EmptySet("snn"));
    }
    let total: f64 = gen
        .par_iter()
        .map(|g| {
            reference
                .iter()
                .map(|r| tanimoto(g, r).expect("uniform fingerprint width"))
                .fold(0.0, f64::max)
        })
        .sum();
    Ok(total / gen.len() as f64)
}

pub fn snn(gen: &[MolecularGraph], reference: &[MolecularGraph]) -> Result<f64, MetricError> {
    snn_fp(&fingerprints(gen), &fingerprints(reference))
}

/// 1 − mean pairwise Tanimoto over unordered distinct pairs.
pub fn intdiv_fp(gen: &[Fingerprint]) -> Result<f64, MetricError> {
    if gen.len() < 2 {
        return Err(MetricError::SingletonSet);
    }
    let n = gen.len();
    let total: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for j in (i + 1)..n {
                acc += tanimoto(&gen[i], &gen[j]).expect("uniform fingerprint width");
            }
            acc
        })
        .sum();
    let pairs = (n * (n - 1) / 2) as f64;
    Ok(1.0 - total / pairs)
}

pub fn intdiv(gen: &[MolecularGraph]) -> Result<f64, MetricError> {
    intdiv_fp(&fingerprints(gen))
}

/// Fraction of generated canonical keys absent from the training key set.
pub fn novelty(gen: &[MolecularGraph], train: &[MolecularGraph]) -> Result<f64, MetricError> {
    if gen.is_empty() {
        return Err(MetricError::EmptySet("novelty"));
    }
    let train_keys: HashSet<String> = train.par_iter().map(canonical_key).collect();
    let fresh = gen
        .par_iter()
        .map(canonical_key)
        .filter(|k| !train_keys.contains(k))
        .count();
    Ok(fresh as f64 / gen.len() as f64)
}

/// Distinct canonical keys over generation attempts (auxiliary diagnostic).
pub fn uniqueness(gen: &[MolecularGraph]) -> Result<f64, MetricError> {
    if gen.is_empty() {
        return Err(MetricError::EmptySet("uniqueness"));
    }
    let keys: HashSet<String> = gen.par_iter().map(canonical_key).collect();
    Ok(keys.len() as f64 / gen.len() as f64)
}

/// Metric-name → value map with set sizes and config echo.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerationReport {
    pub metrics: std::collections::BTreeMap<String, Option<f64>>,
    pub gen_size: usize,
    pub ref_size: usize,
    pub train_size: usize,
    pub note: String,
}

/// Evaluate every distribution metric with shared fingerprint caches.
pub fn evaluate_all(
    gen_attempts: &[Option<MolecularGraph>],
    reference: &[MolecularGraph],
    train: &[MolecularGraph],
) -> Result<GenerationReport, MetricError> {
    let valid_rate = validity(gen_attempts)?;
    let gen: Vec<MolecularGraph> = gen_attempts
        .iter()
        .flatten()
        .filter(|g| validate(g).valid && g.is_connected())
        .cloned()
        .collect();
    if gen.is_empty() || reference.is_empty() {
        return Err(MetricError::EmptySet("evaluate_all"));
    }
    let gen_fp = fingerprints(&gen);
    let ref_fp = fingerprints(reference);
    let mut metrics = std::collections::BTreeMap::new();
    metrics.insert("validity".into(), Some(valid_rate));
    metrics.insert("frag".into(), Some(frag(&gen, reference)?));
    metrics.insert("scaf".into(), Some(scaf(&gen, reference)?));
    metrics.insert("snn".into(), Some(snn_fp(&gen_fp, &ref_fp)?));
    metrics.insert(
        "intdiv".into(),
        if gen.len() >= 2 {
            Some(intdiv_fp(&gen_fp)?)
        } else {
            None
        },
    );
    metrics.insert("novelty".into(), Some(novelty(&gen, train)?));
    metrics.insert("uniqueness".into(), Some(uniqueness(&gen)?));
    metrics.insert("fcd".into(), None);
    Ok(GenerationReport {
        metrics,
        gen_size: gen.len(),
        ref_size: reference.len(),
        train_size: train.len(),
        note: "fcd is null: it requires a pretrained external network".into(),
    })
}
