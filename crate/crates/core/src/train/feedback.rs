//! Chemical-feedback fine-tuning: align sequence log-probabilities with
//! property-score rankings via the combined rank + cross-entropy loss.

use super::candidates::{generate_candidates, CandidateSet};
use super::loss::{combined_loss_var, rank_loss_var};
use super::optimizer::{mean_gradients, Adam, AdamConfig};
use super::TrainError;
use crate::descriptors::PropertyFunction;
use crate::lang::{Alphabet, Token, TokenSeq};
use crate::model::{
    build_decoder, build_encoder, gradients, GradientSet, Parameters, SamplerConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// What the token-level cross-entropy term trains on during feedback.
///
/// Source reconstruction is the default: it anchors generative capability
/// without property pressure, so a zero rank-loss weight is a true ablation.
/// Training on the best candidate instead adds a best-of-k hill-climb signal
/// of its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CeTarget {
    /// Reconstruct the source molecule (default).
    Source,
    /// Reconstruct the highest-scoring candidate.
    BestCandidate,
    /// Mean reconstruction over all candidates.
    AllCandidates,
}

/// Whether candidate sets are regenerated each epoch or fixed after the
/// first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CandidateRefresh {
    PerEpoch,
    Once,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeedbackConfig {
    /// Rank-loss weight α.
    pub alpha: f64,
    /// Base margin γ; the pair margin is (j−i)·γ.
    pub gamma: f64,
    /// Label-smoothing mass β.
    pub beta: f64,
    /// Candidates per input.
    pub k: usize,
    pub learning_rate: f64,
    pub warmup_steps: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub candidate_temperature: f64,
    pub candidate_top_k: usize,
    pub ce_target: CeTarget,
    pub refresh: CandidateRefresh,
}

impl Default for FeedbackConfig {
    fn default() -> Self {
        FeedbackConfig {
            alpha: 3.0,
            gamma: 0.001,
            beta: 0.1,
            k: 30,
            learning_rate: 3e-5,
            warmup_steps: 20,
            batch_size: 8,
            epochs: 3,
            seed: 0,
            candidate_temperature: 1.25,
            candidate_top_k: 0,
            ce_target: CeTarget::Source,
            refresh: CandidateRefresh::PerEpoch,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeedbackReport {
    pub epoch_losses: Vec<f64>,
    pub epoch_rank_losses: Vec<f64>,
    pub skipped_degenerate: usize,
    pub steps: usize,
    pub seed: u64,
}

fn seq_ids(alphabet: &Alphabet, seq: &TokenSeq) -> Result<Vec<usize>, TrainError> {
    alphabet
        .encode_ids(seq)
        .ok_or_else(|| TrainError::Vocabulary(seq.to_text()))
}

/// Loss for one candidate set: encoder runs once; each candidate is decoded
/// teacher-forced for its log-probability; the rank loss orders those by
/// property score and the cross-entropy term anchors generation.
fn set_gradients(
    params: &Parameters<f32>,
    alphabet: &Alphabet,
    set: &CandidateSet,
    cfg: &FeedbackConfig,
) -> Result<(f64, f64, GradientSet<f32>), TrainError> {
    let start = alphabet.id_of(Token::Start).expect("specials");
    let end = alphabet.id_of(Token::End).expect("specials");
    let mut src_ids = vec![start];
    src_ids.extend(seq_ids(alphabet, &set.source)?);
    src_ids.push(end);

    let cand_ids: Vec<Vec<usize>> = set
        .candidates
        .iter()
        .map(|c| seq_ids(alphabet, &c.tokens))
        .collect::<Result<_, _>>()?;
    let scores: Vec<f64> = set.candidates.iter().map(|c| c.score).collect();

    let mut rank_value = 0.0f64;
    let (loss, grads) = gradients(params, |tape, bound| {
        let enc = build_encoder(tape, bound, &params.config, &src_ids, None);
        let mut f_vars = Vec::with_capacity(cand_ids.len());
        for ids in &cand_ids {
            let mut dec_in = vec![start];
            dec_in.extend(&ids[..ids.len() - 1]);
            let logits = build_decoder(tape, bound, &params.config, enc, &dec_in, None);
            f_vars.push(tape.log_prob_sum(logits, ids.clone()));
        }
        let rank = rank_loss_var(tape, &f_vars, &scores, cfg.gamma);
        rank_value = tape.value(rank).item() as f64;

        let beta = cfg.beta as f32;
        let ce = match cfg.ce_target {
            CeTarget::BestCandidate => {
                let mut targets = cand_ids[0].clone();
                targets.push(end);
                let mut dec_in = vec![start];
                dec_in.extend(&cand_ids[0]);
                let logits = build_decoder(tape, bound, &params.config, enc, &dec_in, None);
                tape.ce_smoothed(logits, targets, beta)
            }
            CeTarget::Source => {
                let source_ids = seq_ids(alphabet, &set.source).expect("checked above");
                let mut targets = source_ids.clone();
                targets.push(end);
                let mut dec_in = vec![start];
                dec_in.extend(&source_ids);
                let logits = build_decoder(tape, bound, &params.config, enc, &dec_in, None);
                tape.ce_smoothed(logits, targets, beta)
            }
            CeTarget::AllCandidates => {
                let mut acc = tape.input(crate::nn::Tensor::scalar(0.0f32));
                for ids in &cand_ids {
                    let mut targets = ids.clone();
                    targets.push(end);
                    let mut dec_in = vec![start];
                    dec_in.extend(ids);
                    let full = build_decoder(tape, bound, &params.config, enc, &dec_in, None);
                    let ce = tape.ce_smoothed(full, targets, beta);
                    acc = tape.add(acc, ce);
                }
                tape.scale(acc, 1.0 / cand_ids.len().max(1) as f32)
            }
        };
        Ok(combined_loss_var(tape, ce, rank, cfg.alpha))
    })?;
    Ok((loss, rank_value, grads))
}

/// Fine-tune so that candidate rankings by estimated probability track
/// property-score rankings. Degenerate candidate sets (fewer than two
/// distinct molecules) are skipped and counted.
pub fn feedback_finetune(
    params: &mut Parameters<f32>,
    sources: &[TokenSeq],
    alphabet: &Alphabet,
    property: &PropertyFunction,
    cfg: &FeedbackConfig,
) -> Result<FeedbackReport, TrainError> {
    if sources.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    if cfg.k < 2 {
        return Err(TrainError::Config("k must be at least 2".into()));
    }
    let usable: Vec<&TokenSeq> = sources
        .iter()
        .filter(|s| !s.is_empty() && s.len() + 2 <= params.config.max_len)
        .collect();
    if usable.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    let sampler = SamplerConfig {
        temperature: cfg.candidate_temperature,
        top_k: cfg.candidate_top_k,
        max_tokens: params.config.max_len - 2,
    };

    let steps_per_epoch = usable.len().div_ceil(cfg.batch_size);
    let total_steps = steps_per_epoch * cfg.epochs;
    let mut adam = Adam::new(
        AdamConfig::new(cfg.learning_rate, cfg.warmup_steps, total_steps),
        params,
    );
    let freeze = {
        let mut n = 0;
        params.tree.visit(&mut |_, _| n += 1);
        vec![false; n]
    };

    let mut skipped = 0usize;
    let mut epoch_losses = Vec::new();
    let mut epoch_rank_losses = Vec::new();
    let mut fixed_sets: Option<Vec<CandidateSet>> = None;

    for epoch in 0..cfg.epochs {
        let sets: Vec<CandidateSet> = match (&fixed_sets, cfg.refresh) {
            (Some(s), CandidateRefresh::Once) => s.clone(),
            _ => {
                let generated: Vec<CandidateSet> = usable
                    .par_iter()
                    .enumerate()
                    .map(|(i, src)| {
                        let mut rng = ChaCha8Rng::seed_from_u64(
                            cfg.seed
                                .wrapping_mul(0x9e3779b97f4a7c15)
                                .wrapping_add((epoch * usable.len() + i) as u64),
                        );
                        generate_candidates(params, alphabet, src, cfg.k, property, sampler, &mut rng)
                    })
                    .collect::<Result<_, _>>()
                    .map_err(TrainError::Model)?;
                if cfg.refresh == CandidateRefresh::Once && fixed_sets.is_none() {
                    fixed_sets = Some(generated.clone());
                }
                generated
            }
        };

        let live: Vec<&CandidateSet> = sets.iter().filter(|s| !s.degenerate).collect();
        skipped += sets.len() - live.len();

        let mut epoch_loss = 0.0;
        let mut epoch_rank = 0.0;
        let mut counted = 0usize;
        type SetResult = Result<(f64, f64, GradientSet<f32>), TrainError>;
        for chunk in live.chunks(cfg.batch_size) {
            let results: Vec<SetResult> = chunk
                .par_iter()
                .map(|set| set_gradients(params, alphabet, set, cfg))
                .collect();
            let mut batch = Vec::new();
            for r in results {
                let (loss, rank, grads) = r?;
                epoch_loss += loss;
                epoch_rank += rank;
                counted += 1;
                batch.push(grads);
            }
            if batch.is_empty() {
                continue;
            }
            let grads = mean_gradients(batch);
            adam.step(params, &grads, &freeze);
        }
        epoch_losses.push(epoch_loss / counted.max(1) as f64);
        epoch_rank_losses.push(epoch_rank / counted.max(1) as f64);
    }
    Ok(FeedbackReport {
        epoch_losses,
        epoch_rank_losses,
        skipped_degenerate: skipped,
        steps: adam.steps_taken(),
        seed: cfg.seed,
    })
}
