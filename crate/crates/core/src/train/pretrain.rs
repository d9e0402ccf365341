//! Masked-reconstruction pretraining and the mixed-domain prefix stage.

use super::corrupt::{corrupt, mask_all};
use super::optimizer::{mean_gradients, Adam, AdamConfig};
use super::TrainError;
use crate::lang::{Alphabet, Token, TokenSeq};
use crate::model::{checkpoint, gradients, CheckpointMeta, GradientSet, Parameters};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PretrainConfig {
    pub mask_rate: f64,
    pub learning_rate: f64,
    pub warmup_steps: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Fraction of examples whose source is fully masked; keeps the
    /// length-only input used by unconditional generation in-distribution.
    pub full_mask_prob: f64,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        PretrainConfig {
            mask_rate: 0.15,
            learning_rate: 1e-3,
            warmup_steps: 200,
            batch_size: 8,
            epochs: 20,
            seed: 0,
            full_mask_prob: 0.35,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    pub epoch_losses: Vec<f64>,
    pub steps: usize,
    pub seed: u64,
    pub skipped_examples: usize,
}

/// Histogram of content lengths as (length, count), ascending.
pub fn length_histogram(corpus: &[TokenSeq]) -> Vec<(u32, u64)> {
    let mut map = std::collections::BTreeMap::new();
    for seq in corpus {
        *map.entry(seq.len() as u32).or_insert(0u64) += 1;
    }
    map.into_iter().collect()
}

fn example_rng(seed: u64, epoch: usize, index: usize) -> ChaCha8Rng {
    let mut x = seed
        .wrapping_mul(0x9e3779b97f4a7c15)
        .wrapping_add(epoch as u64)
        .wrapping_mul(0xbf58476d1ce4e5b9)
        .wrapping_add(index as u64);
    x ^= x >> 31;
    ChaCha8Rng::seed_from_u64(x)
}

/// One example's reconstruction loss and gradients. The source is the
/// corrupted sequence; the decoder reconstructs the original (end token
/// included).
fn example_gradients(
    params: &Parameters<f32>,
    alphabet: &Alphabet,
    seq: &TokenSeq,
    cfg: &PretrainConfig,
    beta: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, GradientSet<f32>), TrainError> {
    let corrupted = if rng.gen_range(0.0..1.0) < cfg.full_mask_prob {
        mask_all(seq)
    } else {
        corrupt(seq, cfg.mask_rate, rng)?.0
    };
    let start = alphabet.id_of(Token::Start).expect("specials");
    let end = alphabet.id_of(Token::End).expect("specials");
    let to_ids = |s: &TokenSeq| -> Result<Vec<usize>, TrainError> {
        alphabet
            .encode_ids(s)
            .ok_or_else(|| TrainError::Vocabulary(s.to_text()))
    };
    let mut src_ids = vec![start];
    src_ids.extend(to_ids(&corrupted)?);
    src_ids.push(end);
    let orig_ids = to_ids(seq)?;
    let mut dec_in = vec![start];
    dec_in.extend(&orig_ids);
    let mut targets = orig_ids;
    targets.push(end);

    let (loss, grads) = gradients(params, |tape, bound| {
        let enc = crate::model::build_encoder(tape, bound, &params.config, &src_ids, None);
        let logits =
            crate::model::build_decoder(tape, bound, &params.config, enc, &dec_in, None);
        Ok(tape.ce_smoothed(logits, targets.clone(), beta as f32))
    })?;
    Ok((loss, grads))
}

struct LoopOptions<'a> {
    beta: f64,
    freeze_backbone: bool,
    checkpoint_dir: Option<&'a Path>,
    stage: &'a str,
}

fn train_loop(
    params: &mut Parameters<f32>,
    corpus: &[TokenSeq],
    alphabet: &Alphabet,
    cfg: &PretrainConfig,
    opts: &LoopOptions,
) -> Result<TrainReport, TrainError> {
    if corpus.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    let usable: Vec<&TokenSeq> = corpus
        .iter()
        .filter(|s| !s.is_empty() && s.len() + 2 <= params.config.max_len)
        .collect();
    let skipped_examples = corpus.len() - usable.len();
    if usable.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }

    let steps_per_epoch = usable.len().div_ceil(cfg.batch_size);
    let total_steps = steps_per_epoch * cfg.epochs;
    let mut adam = Adam::new(
        AdamConfig::new(cfg.learning_rate, cfg.warmup_steps, total_steps),
        params,
    );
    let freeze: Vec<bool> = if opts.freeze_backbone {
        let mut f = Vec::new();
        params
            .tree
            .visit(&mut |name, _| f.push(!name.starts_with("prefixes.")));
        f
    } else {
        let mut n = 0;
        params.tree.visit(&mut |_, _| n += 1);
        vec![false; n]
    };

    let meta = CheckpointMeta {
        alphabet: alphabet.tokens().iter().map(|t| t.to_string()).collect(),
        length_hist: length_histogram(corpus),
        stage: opts.stage.to_string(),
    };

    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut last_good = params.clone();
    for epoch in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..usable.len()).collect();
        let mut shuffle_rng = example_rng(cfg.seed, epoch, usize::MAX);
        order.shuffle(&mut shuffle_rng);

        let mut epoch_loss = 0.0;
        let mut counted = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let results: Vec<Result<(f64, GradientSet<f32>), TrainError>> = chunk
                .par_iter()
                .map(|&idx| {
                    let mut rng = example_rng(cfg.seed, epoch, idx);
                    example_gradients(params, alphabet, usable[idx], cfg, opts.beta, &mut rng)
                })
                .collect();
            let mut batch = Vec::with_capacity(results.len());
            for r in results {
                match r {
                    Ok(pair) => batch.push(pair),
                    Err(TrainError::Model(crate::model::ModelError::NonFiniteLoss)) => {
                        *params = last_good.clone();
                        return Err(TrainError::Diverged { last_epoch: epoch });
                    }
                    Err(e) => return Err(e),
                }
            }
            let losses: f64 = batch.iter().map(|(l, _)| *l).sum();
            epoch_loss += losses;
            counted += batch.len();
            let grads = mean_gradients(batch.into_iter().map(|(_, g)| g).collect());
            adam.step(params, &grads, &freeze);
        }
        let mean_loss = epoch_loss / counted.max(1) as f64;
        if !mean_loss.is_finite() {
            *params = last_good.clone();
            return Err(TrainError::Diverged { last_epoch: epoch });
        }
        epoch_losses.push(mean_loss);
        last_good = params.clone();
        if let Some(dir) = opts.checkpoint_dir {
            std::fs::create_dir_all(dir).map_err(|e| TrainError::Io(e.to_string()))?;
            checkpoint::save(params, &meta, &dir.join(format!("epoch{epoch:03}.mgfk")))
                .map_err(TrainError::Model)?;
            checkpoint::save(params, &meta, &dir.join("latest.mgfk"))
                .map_err(TrainError::Model)?;
        }
    }
    Ok(TrainReport {
        epoch_losses,
        steps: adam.steps_taken(),
        seed: cfg.seed,
        skipped_examples,
    })
}

/// Stage one: masked-reconstruction pretraining on a single-domain corpus.
pub fn pretrain(
    params: &mut Parameters<f32>,
    corpus: &[TokenSeq],
    alphabet: &Alphabet,
    cfg: &PretrainConfig,
    checkpoint_dir: Option<&Path>,
) -> Result<TrainReport, TrainError> {
    train_loop(
        params,
        corpus,
        alphabet,
        cfg,
        &LoopOptions {
            beta: 0.0,
            freeze_backbone: false,
            checkpoint_dir,
            stage: "pretrain",
        },
    )
}

/// Stage two: the same reconstruction objective over a mixed-domain corpus.
/// By default both the prefix bank and the backbone update; the
/// frozen-backbone switch restricts updates to the prefixes.
pub fn prefix_stage(
    params: &mut Parameters<f32>,
    mixed_corpus: &[TokenSeq],
    alphabet: &Alphabet,
    cfg: &PretrainConfig,
    freeze_backbone: bool,
    checkpoint_dir: Option<&Path>,
) -> Result<TrainReport, TrainError> {
    train_loop(
        params,
        mixed_corpus,
        alphabet,
        cfg,
        &LoopOptions {
            beta: 0.0,
            freeze_backbone,
            checkpoint_dir,
            stage: "prefix_stage",
        },
    )
}
