//! Single-head prefix attention in two algebraically equivalent forms.
//!
//! The composed form runs softmax over the concatenation of prefix keys and
//! projected context keys. The decomposed form interpolates a prefix-only
//! attention and a standard attention with the scalar λ(x), the softmax mass
//! landing on prefix positions. The two must agree to floating-point
//! accuracy; the transformer uses the composed form and tests pin the
//! identity.

use crate::nn::{Real, Tensor};

/// Per-head projection matrices, each d×d_h.
#[derive(Debug, Clone)]
pub struct HeadProjections<T> {
    pub wq: Tensor<T>,
    pub wk: Tensor<T>,
    pub wv: Tensor<T>,
}

fn project_query<T: Real>(x: &[T], wq: &Tensor<T>) -> Vec<T> {
    assert_eq!(x.len(), wq.rows(), "query width must match W_q rows");
    let mut q = vec![T::ZERO; wq.cols()];
    for (i, &xi) in x.iter().enumerate() {
        for (j, qj) in q.iter_mut().enumerate() {
            *qj = *qj + xi * wq.get(i, j);
        }
    }
    q
}

fn scaled_scores<T: Real>(q: &[T], keys: &Tensor<T>) -> Vec<T> {
    let scale = T::from_f64(1.0 / (q.len() as f64).sqrt());
    (0..keys.rows())
        .map(|r| {
            let mut acc = T::ZERO;
            for (a, b) in q.iter().zip(keys.row(r)) {
                acc = acc + *a * *b;
            }
            acc * scale
        })
        .collect()
}

fn softmax<T: Real>(scores: &[T]) -> Vec<T> {
    let mut mx = scores[0];
    for &s in scores {
        mx = mx.maximum(s);
    }
    let mut out: Vec<T> = scores.iter().map(|&s| (s - mx).exp()).collect();
    let mut sum = T::ZERO;
    for &v in &out {
        sum = sum + v;
    }
    for v in out.iter_mut() {
        *v = *v / sum;
    }
    out
}

fn weighted_rows<T: Real>(weights: &[T], values: &Tensor<T>) -> Vec<T> {
    let mut out = vec![T::ZERO; values.cols()];
    for (r, &w) in weights.iter().enumerate() {
        for (o, &v) in out.iter_mut().zip(values.row(r)) {
            *o = *o + w * v;
        }
    }
    out
}

/// Composed prefix attention for one head: softmax over concatenated prefix
/// and context keys applied to concatenated values.
///
/// `x` is the d-wide query vector, `ctx` the L×d context, `pk`/`pv` the
/// per-head prefix slices (m×d_h). Prefix rows participate as extra key/value
/// rows ahead of the projected context.
pub fn prefix_attention<T: Real>(
    x: &[T],
    ctx: &Tensor<T>,
    w: &HeadProjections<T>,
    pk: &Tensor<T>,
    pv: &Tensor<T>,
) -> Vec<T> {
    let q = project_query(x, &w.wq);
    let keys = pk.concat_rows(&ctx.matmul(&w.wk));
    let values = pv.concat_rows(&ctx.matmul(&w.wv));
    let weights = softmax(&scaled_scores(&q, &keys));
    weighted_rows(&weights, &values)
}

/// λ(x): the softmax mass assigned to prefix positions. Zero when there are
/// no prefix rows; strictly inside (0, 1) otherwise.
pub fn lambda_of<T: Real>(x: &[T], ctx: &Tensor<T>, w: &HeadProjections<T>, pk: &Tensor<T>) -> T {
    let m = pk.rows();
    if m == 0 {
        return T::ZERO;
    }
    let q = project_query(x, &w.wq);
    let keys = pk.concat_rows(&ctx.matmul(&w.wk));
    let weights = softmax(&scaled_scores(&q, &keys));
    let mut lambda = T::ZERO;
    for &v in &weights[..m] {
        lambda = lambda + v;
    }
    lambda
}

/// Decomposed route: λ·Attn(xW_q, P_k, P_v) + (1−λ)·Attn(xW_q, XW_k, XW_v).
pub fn decomposed_prefix_attention<T: Real>(
    x: &[T],
    ctx: &Tensor<T>,
    w: &HeadProjections<T>,
    pk: &Tensor<T>,
    pv: &Tensor<T>,
) -> Vec<T> {
    let q = project_query(x, &w.wq);
    let lambda = lambda_of(x, ctx, w, pk);
    let keys = ctx.matmul(&w.wk);
    let values = ctx.matmul(&w.wv);
    let std_attn = weighted_rows(&softmax(&scaled_scores(&q, &keys)), &values);
    let prefix_attn = if pk.rows() > 0 {
        weighted_rows(&softmax(&scaled_scores(&q, pk)), pv)
    } else {
        vec![T::ZERO; values.cols()]
    };
    let one = T::ONE;
    prefix_attn
        .iter()
        .zip(&std_attn)
        .map(|(&p, &s)| lambda * p + (one - lambda) * s)
        .collect()
}

/// Standard attention without prefixes (the m = 0 reference).
pub fn standard_attention<T: Real>(x: &[T], ctx: &Tensor<T>, w: &HeadProjections<T>) -> Vec<T> {
    let q = project_query(x, &w.wq);
    let keys = ctx.matmul(&w.wk);
    let values = ctx.matmul(&w.wv);
    weighted_rows(&softmax(&scaled_scores(&q, &keys)), &values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rand_tensor(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Tensor<f64> {
        Tensor::from_vec(
            rows,
            cols,
            (0..rows * cols).map(|_| rng.gen_range(-1.5..1.5)).collect(),
        )
    }

    fn setup(rng: &mut ChaCha8Rng, d: usize, dh: usize, l: usize, m: usize) -> (
        Vec<f64>,
        Tensor<f64>,
        HeadProjections<f64>,
        Tensor<f64>,
        Tensor<f64>,
    ) {
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ctx = rand_tensor(rng, l, d);
        let w = HeadProjections {
            wq: rand_tensor(rng, d, dh),
            wk: rand_tensor(rng, d, dh),
            wv: rand_tensor(rng, d, dh),
        };
        let pk = rand_tensor(rng, m, dh);
        let pv = rand_tensor(rng, m, dh);
        (x, ctx, w, pk, pv)
    }

    #[test]
    fn zero_prefix_equals_standard_attention() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (x, ctx, w, pk, pv) = setup(&mut rng, 6, 3, 4, 0);
        let with = prefix_attention(&x, &ctx, &w, &pk, &pv);
        let without = standard_attention(&x, &ctx, &w);
        for (a, b) in with.iter().zip(&without) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(lambda_of(&x, &ctx, &w, &pk), 0.0);
    }

    #[test]
    fn zero_query_gives_symmetric_lambda() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (_, ctx, w, pk, pv) = setup(&mut rng, 6, 3, 5, 3);
        let x = vec![0.0; 6];
        let lambda = lambda_of(&x, &ctx, &w, &pk);
        assert!((lambda - 3.0 / 8.0).abs() < 1e-12);
        // and the output is the mean of all value rows
        let out = prefix_attention(&x, &ctx, &w, &pk, &pv);
        let all_values = pv.concat_rows(&ctx.matmul(&w.wv));
        for (c, o) in out.iter().enumerate() {
            let mean: f64 =
                (0..all_values.rows()).map(|r| all_values.get(r, c)).sum::<f64>() / 8.0;
            assert!((o - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn composed_equals_decomposed() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let d = rng.gen_range(2..10usize);
            let dh = rng.gen_range(1..=d);
            let l = rng.gen_range(1..8usize);
            let m = rng.gen_range(1..6usize);
            let (x, ctx, w, pk, pv) = setup(&mut rng, d, dh, l, m);
            let a = prefix_attention(&x, &ctx, &w, &pk, &pv);
            let b = decomposed_prefix_attention(&x, &ctx, &w, &pk, &pv);
            for (ai, bi) in a.iter().zip(&b) {
                assert!((ai - bi).abs() <= 1e-9, "{ai} vs {bi}");
            }
            let lambda = lambda_of(&x, &ctx, &w, &pk);
            assert!(lambda > 0.0 && lambda < 1.0);
        }
    }

    #[test]
    fn lambda_monotone_in_prefix_key_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (x, ctx, w, pk, _) = setup(&mut rng, 6, 3, 5, 3);
        // bias prefix keys toward the query direction, scaled up
        let q = project_query(&x, &w.wq);
        let mut last = 0.0;
        for scale in [0.0, 1.0, 2.0, 4.0, 8.0, 16.0] {
            let boosted = Tensor::from_vec(
                pk.rows(),
                pk.cols(),
                (0..pk.rows())
                    .flat_map(|r| {
                        q.iter()
                            .zip(pk.row(r))
                            .map(move |(&qi, &pi)| pi + scale * qi)
                            .collect::<Vec<_>>()
                    })
                    .collect(),
            );
            let lambda = lambda_of(&x, &ctx, &w, &boosted);
            assert!(lambda >= last, "lambda not monotone: {lambda} < {last}");
            last = lambda;
        }
        assert!(last > 0.99, "strongly boosted prefixes should dominate");
    }
}
