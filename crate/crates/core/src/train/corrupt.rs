//! Sequence corruption for masked reconstruction.

use crate::lang::{Token, TokenSeq};
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CorruptError {
    #[error("cannot corrupt an empty sequence")]
    Empty,
    #[error("mask rate {0} outside (0, 1)")]
    BadRate(f64),
}

/// Replace `ceil(rate * len)` uniformly chosen positions with `[MASK]`,
/// returning the corrupted sequence and the chosen positions (sorted).
pub fn corrupt<R: Rng>(
    seq: &TokenSeq,
    rate: f64,
    rng: &mut R,
) -> Result<(TokenSeq, Vec<usize>), CorruptError> {
    if seq.is_empty() {
        return Err(CorruptError::Empty);
    }
    if !(rate > 0.0 && rate < 1.0) {
        return Err(CorruptError::BadRate(rate));
    }
    let count = ((rate * seq.len() as f64).ceil() as usize).max(1);
    let mut positions: Vec<usize> = (0..seq.len()).collect();
    positions.shuffle(rng);
    positions.truncate(count);
    positions.sort_unstable();
    let mut tokens = seq.tokens().to_vec();
    for &p in &positions {
        tokens[p] = Token::Mask;
    }
    Ok((TokenSeq::new(tokens), positions))
}

/// Every position masked; used to keep fully-masked sources (the
/// unconditional-generation input) inside the training distribution.
pub fn mask_all(seq: &TokenSeq) -> TokenSeq {
    TokenSeq::new(vec![Token::Mask; seq.len()])
}
