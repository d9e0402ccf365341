//! Sub-scale probe: copy fidelity and unconditional sample quality (dev aid).

use molforge::corpus::load_corpus;
use molforge::descriptors::{morgan_default, tanimoto};
use molforge::lang::{decode_selfies, Alphabet};
use molforge::metrics;
use molforge::model::{sample, ModelConfig, Parameters, SamplerConfig};
use molforge::train::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn main() {
    let n_corpus: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(2000);
    let t0 = Instant::now();
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/corpus10k.smi");
    let corpus = load_corpus(&path).expect("corpus loads");
    let seqs: Vec<_> = corpus.token_seqs().into_iter().take(n_corpus).collect();
    let graphs: Vec<_> = corpus.graphs().into_iter().take(n_corpus).collect();
    let alphabet = Alphabet::build(seqs.iter()).unwrap();

    let mut params: Parameters<f32> = Parameters::init(
        ModelConfig::compact(alphabet.len()),
        &mut ChaCha8Rng::seed_from_u64(1),
    );
    let batch: usize = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(32);
    let lr: f64 = std::env::args()
        .nth(3)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1e-4);
    let fm: f64 = std::env::args()
        .nth(4)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0.3);
    let cfg = PretrainConfig {
        seed: 1,
        batch_size: batch,
        learning_rate: lr,
        full_mask_prob: fm,
        ..Default::default()
    };
    let report = pretrain(&mut params, &seqs, &alphabet, &cfg, None).unwrap();
    println!(
        "[{:.0}s] losses: {:?}",
        t0.elapsed().as_secs_f64(),
        report
            .epoch_losses
            .iter()
            .map(|l| (l * 100.0).round() / 100.0)
            .collect::<Vec<_>>()
    );

    // copy fidelity: sample conditioned on clean sources
    let sampler = SamplerConfig {
        temperature: 1.0,
        top_k: 0,
        max_tokens: 158,
    };
    let mut sims = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for src_idx in 0..50 {
        let src_fp = morgan_default(&graphs[src_idx]);
        for _ in 0..4 {
            let out = sample(&params, &alphabet, &seqs[src_idx], sampler, &mut rng).unwrap();
            if out.is_empty() {
                continue;
            }
            let g = decode_selfies(&out);
            sims.push(tanimoto(&src_fp, &morgan_default(&g)).unwrap());
        }
    }
    sims.sort_by(f64::total_cmp);
    let q = |p: f64| sims[(p * (sims.len() - 1) as f64) as usize];
    println!(
        "[{:.0}s] conditional sim: p10 {:.3} p50 {:.3} p90 {:.3} frac>=0.4 {:.2} frac>=0.6 {:.2}",
        t0.elapsed().as_secs_f64(),
        q(0.1),
        q(0.5),
        q(0.9),
        sims.iter().filter(|&&s| s >= 0.4).count() as f64 / sims.len() as f64,
        sims.iter().filter(|&&s| s >= 0.6).count() as f64 / sims.len() as f64,
    );

    // unconditional quality
    let hist = length_histogram(&seqs);
    let gen = generate_set(&params, &alphabet, &hist, 500, sampler, 7).unwrap();
    let gen_graphs: Vec<_> = gen.iter().map(|s| decode_selfies(s)).collect();
    let snn = metrics::snn(&gen_graphs, &graphs).unwrap();
    let intdiv = metrics::intdiv(&gen_graphs).unwrap();
    let train_intdiv = metrics::intdiv(&graphs[..500.min(graphs.len())]).unwrap();
    let novelty = metrics::novelty(&gen_graphs, &graphs).unwrap();
    println!(
        "[{:.0}s] uncond: snn {snn:.3} intdiv {intdiv:.3} (train {train_intdiv:.3}) novelty {novelty:.3}",
        t0.elapsed().as_secs_f64()
    );
}
