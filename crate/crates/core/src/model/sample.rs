//! Autoregressive sampling, sequence log-probabilities and the gradient
//! entry point.

use super::params::{BoundParams, Parameters};
use super::transformer::{build_decoder, build_encoder, forward, ModelError};
use crate::lang::{Alphabet, Token, TokenSeq};
use crate::nn::{Real, Tape, Tensor, Var};
use rand::Rng;

#[derive(Debug, Clone, Copy)]
pub struct SamplerConfig {
    pub temperature: f64,
    /// Zero disables top-k filtering.
    pub top_k: usize,
    /// Cap on generated content tokens.
    pub max_tokens: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            temperature: 1.0,
            top_k: 0,
            max_tokens: 128,
        }
    }
}

/// Draw one index from logits with temperature and optional top-k. Start,
/// pad and mask tokens are barred so every sampled sequence decodes.
pub fn sample_index<R: Rng>(
    logits: &[f64],
    temperature: f64,
    top_k: usize,
    barred: &[usize],
    rng: &mut R,
) -> usize {
    let mut masked: Vec<(usize, f64)> = logits
        .iter()
        .copied()
        .enumerate()
        .filter(|(i, _)| !barred.contains(i))
        .collect();
    if temperature <= 1e-6 {
        return masked
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty logits")
            .0;
    }
    if top_k > 0 && top_k < masked.len() {
        masked.sort_by(|a, b| b.1.total_cmp(&a.1));
        masked.truncate(top_k);
    }
    let mx = masked
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = masked
        .iter()
        .map(|&(_, v)| ((v - mx) / temperature).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    let mut draw = rng.gen_range(0.0..1.0) * total;
    for (&(idx, _), &w) in masked.iter().zip(&weights) {
        draw -= w;
        if draw <= 0.0 {
            return idx;
        }
    }
    masked.last().expect("non-empty").0
}

/// Wrap content tokens with start/end specials and map them to ids.
pub fn ids_with_specials(
    alphabet: &Alphabet,
    content: &TokenSeq,
) -> Result<Vec<usize>, ModelError> {
    let mut ids = Vec::with_capacity(content.len() + 2);
    ids.push(alphabet.id_of(Token::Start).expect("specials present"));
    for &t in content.tokens() {
        ids.push(alphabet.id_of(t).ok_or(ModelError::TokenOutOfVocab {
            id: usize::MAX,
            vocab: alphabet.len(),
        })?);
    }
    ids.push(alphabet.id_of(Token::End).expect("specials present"));
    Ok(ids)
}

/// Sample one sequence conditioned on `source` content tokens. Parameters
/// are bound once and the encoder runs once; each step appends a decoder
/// pass over the grown prefix to the same tape. Returns content tokens (no
/// specials).
pub fn sample<T: Real, R: Rng>(
    params: &Parameters<T>,
    alphabet: &Alphabet,
    source: &TokenSeq,
    cfg: SamplerConfig,
    rng: &mut R,
) -> Result<TokenSeq, ModelError> {
    let src_ids = ids_with_specials(alphabet, source)?;
    let mut tape: Tape<T> = Tape::new();
    let bound = params.bind(&mut tape);
    let enc = crate::model::transformer::build_encoder(
        &mut tape,
        &bound,
        &params.config,
        &src_ids,
        None,
    );

    let start = alphabet.id_of(Token::Start).expect("specials");
    let end = alphabet.id_of(Token::End).expect("specials");
    let barred = [
        start,
        alphabet.id_of(Token::Pad).expect("specials"),
        alphabet.id_of(Token::Mask).expect("specials"),
    ];
    let mut dec_in = vec![start];
    let mut content = Vec::new();
    let limit = cfg.max_tokens.min(params.config.max_len - 1);
    while content.len() < limit {
        let logits = crate::model::transformer::build_decoder(
            &mut tape,
            &bound,
            &params.config,
            enc,
            &dec_in,
            None,
        );
        let lv = tape.value(logits);
        let last = lv.row(lv.rows() - 1);
        let logits64: Vec<f64> = last.iter().map(|x| x.to_f64()).collect();
        let idx = sample_index(&logits64, cfg.temperature, cfg.top_k, &barred, rng);
        if idx == end {
            break;
        }
        dec_in.push(idx);
        content.push(alphabet.token(idx));
    }
    Ok(TokenSeq::new(content))
}

/// Strip trailing end/pad markers; the literal candidate content.
pub fn strip_candidate(candidate: &TokenSeq) -> TokenSeq {
    let mut tokens = candidate.tokens().to_vec();
    while matches!(tokens.last(), Some(Token::End) | Some(Token::Pad)) {
        tokens.pop();
    }
    TokenSeq::new(tokens)
}

/// f(S): the summed per-step log-probability of the candidate under teacher
/// forcing, conditioned on the source. Always ≤ 0. The optional
/// length-normalized variant divides by the candidate length.
pub fn sequence_log_prob<T: Real>(
    params: &Parameters<T>,
    alphabet: &Alphabet,
    source: &TokenSeq,
    candidate: &TokenSeq,
    length_normalized: bool,
) -> Result<f64, ModelError> {
    let content = strip_candidate(candidate);
    if content.is_empty() {
        return Err(ModelError::EmptyCandidate);
    }
    let src_ids = ids_with_specials(alphabet, source)?;
    let cand_ids: Vec<usize> = alphabet
        .encode_ids(&content)
        .ok_or(ModelError::TokenOutOfVocab {
            id: usize::MAX,
            vocab: alphabet.len(),
        })?;
    let start = alphabet.id_of(Token::Start).expect("specials");
    let mut dec_in = vec![start];
    dec_in.extend(&cand_ids);
    dec_in.pop(); // predict each content token from its left context
    let run = forward(params, &src_ids, &dec_in, false)?;
    let mut tape = run.tape;
    let f = tape.log_prob_sum(run.logits, cand_ids.clone());
    let mut value = tape.value(f).item().to_f64();
    if length_normalized {
        value /= cand_ids.len() as f64;
    }
    Ok(value)
}

/// Tape-building variant for training losses: returns the scalar f(S) var on
/// an existing tape with already-bound parameters.
pub fn sequence_log_prob_var<T: Real>(
    tape: &mut Tape<T>,
    bound: &BoundParams,
    params: &Parameters<T>,
    src_ids: &[usize],
    cand_ids: &[usize],
) -> Result<Var, ModelError> {
    if cand_ids.is_empty() {
        return Err(ModelError::EmptyCandidate);
    }
    let cfg = &params.config;
    let enc = build_encoder(tape, bound, cfg, src_ids, None);
    let mut dec_in = Vec::with_capacity(cand_ids.len());
    dec_in.push(src_ids[0]); // start id
    dec_in.extend(&cand_ids[..cand_ids.len() - 1]);
    let logits = build_decoder(tape, bound, cfg, enc, &dec_in, None);
    Ok(tape.log_prob_sum(logits, cand_ids.to_vec()))
}

/// Named gradient set aligned with `ParamTree::visit` order.
pub struct GradientSet<T> {
    pub by_name: Vec<(String, Tensor<T>)>,
}

/// Evaluate a scalar loss built by `loss_fn` and return exact reverse-mode
/// gradients for every parameter. Errors when the loss is not finite.
pub fn gradients<T: Real, F>(
    params: &Parameters<T>,
    loss_fn: F,
) -> Result<(f64, GradientSet<T>), ModelError>
where
    F: FnOnce(&mut Tape<T>, &BoundParams) -> Result<Var, ModelError>,
{
    let mut tape = Tape::new();
    let bound = params.bind(&mut tape);
    let loss = loss_fn(&mut tape, &bound)?;
    let loss_value = tape.value(loss).item();
    if !loss_value.is_finite() {
        return Err(ModelError::NonFiniteLoss);
    }
    let grads = tape.backward(loss);
    let mut by_name = Vec::new();
    let named_vars: Vec<(String, Var)> = {
        let mut v = Vec::new();
        bound.visit(&mut |name, &var| v.push((name, var)));
        v
    };
    let mut shapes = Vec::new();
    params.tree.visit(&mut |_, t| shapes.push(t.shape()));
    for ((name, var), shape) in named_vars.into_iter().zip(shapes) {
        by_name.push((name, grads.dense(var, shape)));
    }
    Ok((loss_value.to_f64(), GradientSet { by_name }))
}
