//! Scratch probe: feedback-protocol sweep over a cached checkpoint (dev aid).
//! Usage: probe_fb <lr> <epochs> <cand_temp> <k> [alpha]

use molforge::corpus::load_corpus;
use molforge::descriptors::{CorpusStats, FragmentTable, PropertyFunction};
use molforge::lang::{decode_selfies, Alphabet};
use molforge::model::{checkpoint, SamplerConfig};
use molforge::train::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use std::time::Instant;

fn main() {
    let mut args = std::env::args().skip(1);
    let lr: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1e-4);
    let epochs: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(2);
    let temp: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1.25);
    let k: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(8);
    let alphas: Vec<f64> = args
        .next()
        .map(|s| vec![s.parse().unwrap()])
        .unwrap_or_else(|| vec![3.0, 0.0]);

    let t0 = Instant::now();
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/corpus10k.smi");
    let corpus = load_corpus(&path).expect("corpus loads");
    let seqs = corpus.token_seqs();
    let graphs = corpus.graphs();
    let alphabet = Alphabet::build(seqs.iter()).unwrap();
    let table = Arc::new(FragmentTable::build(graphs.iter()));
    let stats = CorpusStats::compute(graphs.iter(), &table);
    let plogp = PropertyFunction::penalized_logp(table.clone(), stats);
    let (params, meta) =
        checkpoint::load(std::path::Path::new("/tmp/probe_v3.mgfk")).expect("cached checkpoint");
    println!("[{:.0}s] loaded checkpoint ({})", t0.elapsed().as_secs_f64(), meta.stage);

    let sampler = SamplerConfig {
        temperature: 1.0,
        top_k: 0,
        max_tokens: 158,
    };
    let score_set = |params: &molforge::model::Parameters<f32>, seed: u64| -> Vec<f64> {
        let out = generate_set(params, &alphabet, &meta.length_hist, 1000, sampler, seed).unwrap();
        out.iter()
            .map(|s| plogp.score(&decode_selfies(s)))
            .filter(|v| v.is_finite())
            .collect()
    };
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let pre = score_set(&params, 100);
    println!("[{:.0}s] pre mean {:.4}", t0.elapsed().as_secs_f64(), mean(&pre));

    let sources: Vec<_> = seqs.iter().take(256).cloned().collect();
    for &alpha in &alphas {
        let mut arm = params.clone();
        let cfg = FeedbackConfig {
            alpha,
            k,
            epochs,
            batch_size: 8,
            learning_rate: lr,
            warmup_steps: 8,
            candidate_temperature: temp,
            seed: 11,
            ..Default::default()
        };
        let rep = feedback_finetune(&mut arm, &sources, &alphabet, &plogp, &cfg).unwrap();
        let post = score_set(&arm, 101);
        let boot = {
            use rand::Rng;
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            let mut diffs: Vec<f64> = (0..4000)
                .map(|_| {
                    let ma: f64 = (0..pre.len()).map(|_| pre[rng.gen_range(0..pre.len())]).sum::<f64>()
                        / pre.len() as f64;
                    let mb: f64 =
                        (0..post.len()).map(|_| post[rng.gen_range(0..post.len())]).sum::<f64>()
                            / post.len() as f64;
                    mb - ma
                })
                .collect();
            diffs.sort_by(f64::total_cmp);
            (diffs[100], diffs[3899])
        };
        println!(
            "[{:.0}s] alpha={alpha} lr={lr} ep={epochs} T={temp} k={k}: post {:.4} CI [{:.3},{:.3}] rank {:?} skipped {}",
            t0.elapsed().as_secs_f64(),
            mean(&post),
            boot.0,
            boot.1,
            rep.epoch_rank_losses.iter().map(|x| (x * 100.0).round() / 100.0).collect::<Vec<_>>(),
            rep.skipped_degenerate,
        );
    }
}
