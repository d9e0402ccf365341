//! Batch generation from a trained checkpoint.
//!
//! Unconditional sampling feeds the decoder a fully-masked source whose
//! length is drawn from the training corpus length histogram (pretraining
//! sees such inputs through its full-mask fraction), so sample lengths track
//! the corpus without requiring a source file at generation time.

use super::TrainError;
use crate::lang::{Alphabet, Token, TokenSeq};
use crate::model::{sample, Parameters, SamplerConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Draw a content length from a (length, count) histogram.
fn draw_length<R: Rng>(hist: &[(u32, u64)], rng: &mut R) -> usize {
    let total: u64 = hist.iter().map(|&(_, c)| c).sum();
    if total == 0 {
        return 16;
    }
    let mut pick = rng.gen_range(0..total);
    for &(len, count) in hist {
        if pick < count {
            return len as usize;
        }
        pick -= count;
    }
    hist.last().map(|&(l, _)| l as usize).unwrap_or(16)
}

/// Generate `n` sequences unconditionally. Deterministic under `seed`
/// regardless of worker count: each index derives its own rng stream.
pub fn generate_set(
    params: &Parameters<f32>,
    alphabet: &Alphabet,
    length_hist: &[(u32, u64)],
    n: usize,
    sampler: SamplerConfig,
    seed: u64,
) -> Result<Vec<TokenSeq>, TrainError> {
    let max_content = params.config.max_len.saturating_sub(2);
    let fallback = alphabet
        .non_special()
        .first()
        .copied()
        .ok_or_else(|| TrainError::Config("alphabet has no content tokens".into()))?;
    let results: Vec<Result<TokenSeq, TrainError>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(i as u64),
            );
            // retry immediate end-token draws so every output line is a
            // non-empty molecule
            for _ in 0..64 {
                let len = draw_length(length_hist, &mut rng).clamp(1, max_content);
                let source = TokenSeq::new(vec![Token::Mask; len]);
                let out =
                    sample(params, alphabet, &source, sampler, &mut rng).map_err(TrainError::Model)?;
                if !out.is_empty() {
                    return Ok(out);
                }
            }
            Ok(TokenSeq::new(vec![fallback]))
        })
        .collect();
    results.into_iter().collect()
}
