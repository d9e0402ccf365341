//! Candidate generation for chemical feedback: sample, decode, score,
//! deduplicate, order by property score.

use crate::descriptors::PropertyFunction;
use crate::graph::canonical_key;
use crate::lang::{decode_selfies, Alphabet, TokenSeq};
use crate::model::{sample, sequence_log_prob, ModelError, Parameters, SamplerConfig};
use rand::Rng;

#[derive(Debug, Clone)]
pub struct Candidate {
    pub tokens: TokenSeq,
    /// Canonical key of the decoded molecule (dedup identity).
    pub key: String,
    /// Property score PS.
    pub score: f64,
    /// Sequence log-probability f at generation time.
    pub log_prob: f64,
}

/// An input molecule with its scored candidates, deduplicated by canonical
/// key and sorted by property score descending (stable for ties).
#[derive(Debug, Clone)]
pub struct CandidateSet {
    pub source: TokenSeq,
    pub candidates: Vec<Candidate>,
    /// Fewer than two distinct candidates survived generation.
    pub degenerate: bool,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn best(&self) -> Option<&Candidate> {
        self.candidates.first()
    }
}

/// Sample up to `4k` sequences (recovering dedup losses), keep the distinct
/// decodable ones, score them, and return the top `k` by property score.
pub fn generate_candidates<R: Rng>(
    params: &Parameters<f32>,
    alphabet: &Alphabet,
    source: &TokenSeq,
    k: usize,
    property: &PropertyFunction,
    sampler: SamplerConfig,
    rng: &mut R,
) -> Result<CandidateSet, ModelError> {
    let mut seen = std::collections::HashSet::new();
    let mut candidates: Vec<Candidate> = Vec::new();
    let max_draws = 4 * k;
    for _ in 0..max_draws {
        if candidates.len() >= k {
            break;
        }
        let tokens = sample(params, alphabet, source, sampler, rng)?;
        if tokens.is_empty() {
            continue;
        }
        let graph = decode_selfies(&tokens);
        let key = canonical_key(&graph);
        if !seen.insert(key.clone()) {
            continue;
        }
        let score = property.score(&graph);
        if !score.is_finite() {
            continue;
        }
        let log_prob = sequence_log_prob(params, alphabet, source, &tokens, false)?;
        candidates.push(Candidate {
            tokens,
            key,
            score,
            log_prob,
        });
    }
    candidates.sort_by(|a, b| b.score.total_cmp(&a.score));
    candidates.truncate(k);
    let degenerate = candidates.len() < 2;
    Ok(CandidateSet {
        source: source.clone(),
        candidates,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn candidates_are_distinct_and_sorted() {
        let seqs: Vec<TokenSeq> = ["[C][N][O][C][C][C]"]
            .iter()
            .map(|t| crate::lang::tokenize_selfies(t).unwrap())
            .collect();
        let alphabet = Alphabet::build(seqs.iter()).unwrap();
        let params: Parameters<f32> = Parameters::init(
            ModelConfig::toy(alphabet.len()),
            &mut ChaCha8Rng::seed_from_u64(1),
        );
        let property = PropertyFunction::qed();
        let source = crate::lang::tokenize_selfies("[C][N][O]").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let set = generate_candidates(
            &params,
            &alphabet,
            &source,
            6,
            &property,
            SamplerConfig {
                max_tokens: 8,
                ..Default::default()
            },
            &mut rng,
        )
        .unwrap();
        let keys: std::collections::HashSet<&str> =
            set.candidates.iter().map(|c| c.key.as_str()).collect();
        assert_eq!(keys.len(), set.candidates.len());
        for pair in set.candidates.windows(2) {
            assert!(pair[0].score >= pair[1].score);
        }
        assert!(set.len() <= 6);
        for c in &set.candidates {
            assert!(c.log_prob <= 0.0);
        }
    }
}
