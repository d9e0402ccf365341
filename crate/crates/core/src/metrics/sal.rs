//! Substructure Attention Level: the share of final-layer attention mass on
//! annotated functional-group tokens.

use crate::model::{attention_map, ForwardTrace};
use crate::nn::Real;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Token-index spans (half-open) marking meaningful substructures in one
/// molecule's token sequence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubstructureAnnotation {
    pub molecule: String,
    pub spans: Vec<(usize, usize)>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SalError {
    #[error("span ({0}, {1}) out of bounds for sequence of length {2}")]
    SpanOutOfBounds(usize, usize, usize),
    #[error("spans overlap at token {0}")]
    OverlappingSpans(usize),
    #[error("trace has no decoder self-attention layers")]
    EmptyTrace,
}

impl SubstructureAnnotation {
    /// Membership mask over `len` tokens; rejects out-of-bounds or
    /// overlapping spans.
    pub fn mask(&self, len: usize) -> Result<Vec<bool>, SalError> {
        let mut mask = vec![false; len];
        for &(start, end) in &self.spans {
            if start >= end || end > len {
                return Err(SalError::SpanOutOfBounds(start, end, len));
            }
            for m in mask.iter_mut().take(end).skip(start) {
                if *m {
                    return Err(SalError::OverlappingSpans(start));
                }
                *m = true;
            }
        }
        Ok(mask)
    }
}

/// SAL over the final decoder self-attention layer: per query row, attention
/// is renormalized over token columns (prefix mass excluded) and the mass on
/// annotated columns is averaged across rows.
pub fn sal<T: Real>(
    trace: &ForwardTrace<T>,
    annotation: &SubstructureAnnotation,
) -> Result<f64, SalError> {
    if trace.dec_self.is_empty() {
        return Err(SalError::EmptyTrace);
    }
    let last = trace.dec_self.len() - 1;
    let map = attention_map(trace, last).map_err(|_| SalError::EmptyTrace)?;
    let tokens = &map.token_weights;
    let mask = annotation.mask(tokens.cols())?;
    let mut total = 0.0;
    let mut rows_counted = 0usize;
    for r in 0..tokens.rows() {
        let row = tokens.row(r);
        let mut token_mass = 0.0;
        let mut annotated = 0.0;
        for (c, &w) in row.iter().enumerate() {
            let w = w.to_f64();
            token_mass += w;
            if mask[c] {
                annotated += w;
            }
        }
        // rows that cannot see any token column (masked out entirely) have
        // no renormalized distribution and are excluded from the average
        if token_mass > 0.0 {
            total += annotated / token_mass;
            rows_counted += 1;
        }
    }
    if rows_counted == 0 {
        return Ok(0.0);
    }
    Ok(total / rows_counted as f64)
}

/// Quartile summary for per-molecule SAL distributions.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Quartiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

pub fn quartiles(values: &[f64]) -> Option<Quartiles> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let at = |q: f64| -> f64 {
        let pos = q * (sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        if lo == hi {
            sorted[lo]
        } else {
            sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
        }
    };
    Some(Quartiles {
        min: sorted[0],
        q1: at(0.25),
        median: at(0.5),
        q3: at(0.75),
        max: *sorted.last().expect("non-empty"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{forward, ModelConfig, Parameters};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn traced_forward(len: usize) -> ForwardTrace<f64> {
        let params: Parameters<f64> = Parameters::init(
            ModelConfig::toy(8),
            &mut ChaCha8Rng::seed_from_u64(3),
        );
        let src: Vec<usize> = (0..len).map(|i| 4 + (i % 4)).collect();
        let dec: Vec<usize> = (0..len).map(|i| 4 + ((i + 1) % 4)).collect();
        forward(&params, &src, &dec, true).unwrap().trace.unwrap()
    }

    #[test]
    fn full_annotation_gives_one() {
        let trace = traced_forward(6);
        let ann = SubstructureAnnotation {
            molecule: "all".into(),
            spans: vec![(0, 6)],
        };
        let v = sal(&trace, &ann).unwrap();
        assert!((v - 1.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn empty_annotation_gives_zero() {
        let trace = traced_forward(5);
        let ann = SubstructureAnnotation {
            molecule: "none".into(),
            spans: vec![],
        };
        assert_eq!(sal(&trace, &ann).unwrap(), 0.0);
    }

    #[test]
    fn sal_stays_in_unit_interval() {
        let trace = traced_forward(8);
        let ann = SubstructureAnnotation {
            molecule: "part".into(),
            spans: vec![(1, 3), (5, 6)],
        };
        let v = sal(&trace, &ann).unwrap();
        assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn bad_spans_rejected() {
        let trace = traced_forward(4);
        let oob = SubstructureAnnotation {
            molecule: "x".into(),
            spans: vec![(2, 9)],
        };
        assert_eq!(sal(&trace, &oob).unwrap_err(), SalError::SpanOutOfBounds(2, 9, 4));
        let overlap = SubstructureAnnotation {
            molecule: "x".into(),
            spans: vec![(0, 2), (1, 3)],
        };
        assert_eq!(sal(&trace, &overlap).unwrap_err(), SalError::OverlappingSpans(1));
    }

    #[test]
    fn uniform_attention_half_annotation_gives_half() {
        use crate::model::AttnRecord;
        use crate::nn::Tensor;
        // synthetic uniform trace: 2 prefix columns + 6 token columns
        let rows = 4;
        let cols = 8;
        let uniform = Tensor::from_vec(rows, cols, vec![1.0f64 / cols as f64; rows * cols]);
        let trace = ForwardTrace {
            enc_self: vec![],
            dec_self: vec![AttnRecord {
                heads: vec![uniform.clone(), uniform],
                prefix_cols: 2,
            }],
            cross: vec![],
        };
        let ann = SubstructureAnnotation {
            molecule: "half".into(),
            spans: vec![(0, 3)],
        };
        let v = sal(&trace, &ann).unwrap();
        assert!((v - 0.5).abs() < 1e-9, "{v}");
    }

    #[test]
    fn sal_invariant_to_permuting_unannotated_columns() {
        use crate::model::AttnRecord;
        use crate::nn::Tensor;
        let rows = 3;
        let cols = 6;
        let data: Vec<f64> = (0..rows * cols).map(|i| (i + 1) as f64).collect();
        let mut t = Tensor::from_vec(rows, cols, data);
        // normalize rows
        for r in 0..rows {
            let s: f64 = t.row(r).iter().sum();
            for v in t.row_mut(r) {
                *v /= s;
            }
        }
        let make_trace = |t: Tensor<f64>| ForwardTrace {
            enc_self: vec![],
            dec_self: vec![AttnRecord {
                heads: vec![t],
                prefix_cols: 0,
            }],
            cross: vec![],
        };
        let ann = SubstructureAnnotation {
            molecule: "first-two".into(),
            spans: vec![(0, 2)],
        };
        let base = sal(&make_trace(t.clone()), &ann).unwrap();
        // swap unannotated columns 3 and 5
        let mut swapped = t.clone();
        for r in 0..rows {
            let a = swapped.get(r, 3);
            let b = swapped.get(r, 5);
            swapped.set(r, 3, b);
            swapped.set(r, 5, a);
        }
        let permuted = sal(&make_trace(swapped), &ann).unwrap();
        assert!((base - permuted).abs() < 1e-15);
    }

    #[test]
    fn quartiles_consistent() {
        let q = quartiles(&[0.1, 0.9, 0.5, 0.3, 0.7]).unwrap();
        assert_eq!(q.min, 0.1);
        assert_eq!(q.median, 0.5);
        assert_eq!(q.max, 0.9);
        assert!(q.q1 <= q.median && q.median <= q.q3);
        assert!(quartiles(&[]).is_none());
    }
}
