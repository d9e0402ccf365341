//! Scratch probe for the full desk-scale protocol (dev aid): pretrain,
//! generate, evaluate, feedback both arms, constrained optimization.

use molforge::corpus::load_corpus;
use molforge::descriptors::{CorpusStats, FragmentTable, PropertyFunction};
use molforge::lang::{decode_selfies, Alphabet};
use molforge::metrics;
use molforge::model::{ModelConfig, Parameters, SamplerConfig};
use molforge::train::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/corpus10k.smi");
    let corpus = load_corpus(&path).expect("corpus loads");
    let seqs = corpus.token_seqs();
    let graphs = corpus.graphs();
    let alphabet = Alphabet::build(seqs.iter()).unwrap();
    println!("[{:.0}s] corpus {} alphabet {}", t0.elapsed().as_secs_f64(), seqs.len(), alphabet.len());

    let table = Arc::new(FragmentTable::build(graphs.iter()));
    let stats = CorpusStats::compute(graphs.iter(), &table);
    let plogp = PropertyFunction::penalized_logp(table.clone(), stats);

    let ckpt_path = std::path::Path::new("/tmp/probe_v3.mgfk");
    let params: Parameters<f32> = if ckpt_path.exists() {
        let (p, _) = molforge::model::checkpoint::load(ckpt_path).unwrap();
        println!("[{:.0}s] loaded checkpoint", t0.elapsed().as_secs_f64());
        p
    } else {
        let mut p: Parameters<f32> = Parameters::init(
            ModelConfig::compact(alphabet.len()),
            &mut ChaCha8Rng::seed_from_u64(1),
        );
        let cfg = PretrainConfig { seed: 1, ..Default::default() };
        let report = pretrain(&mut p, &seqs, &alphabet, &cfg, None).unwrap();
        println!(
            "[{:.0}s] pretrain losses first {:.3} last {:.3}",
            t0.elapsed().as_secs_f64(),
            report.epoch_losses.first().unwrap(),
            report.epoch_losses.last().unwrap()
        );
        let meta = molforge::model::CheckpointMeta {
            alphabet: alphabet.tokens().iter().map(|t| t.to_string()).collect(),
            length_hist: length_histogram(&seqs),
            stage: "probe".into(),
        };
        molforge::model::checkpoint::save(&p, &meta, ckpt_path).unwrap();
        p
    };
    let params = &params;

    // criterion 7 evaluation across sampling protocols
    let hist = length_histogram(&seqs);
    let train_intdiv = metrics::intdiv(&graphs[..1000]).unwrap();
    for (temp, top_k) in [(1.0, 0usize), (0.95, 0), (1.0, 30), (0.9, 0)] {
        let s = SamplerConfig { temperature: temp, top_k, max_tokens: 158 };
        let gen = generate_set(params, &alphabet, &hist, 1000, s, 7).unwrap();
        let gen_graphs: Vec<_> = gen.iter().map(decode_selfies).collect();
        let snn = metrics::snn(&gen_graphs, &graphs).unwrap();
        let intdiv = metrics::intdiv(&gen_graphs).unwrap();
        let novelty = metrics::novelty(&gen_graphs, &graphs).unwrap();
        println!(
            "[{:.0}s] T={temp} k={top_k}: snn {snn:.4} intdiv {intdiv:.4} (train {train_intdiv:.4}) novelty {novelty:.4}",
            t0.elapsed().as_secs_f64()
        );
    }
    let sampler = SamplerConfig { temperature: 1.0, top_k: 0, max_tokens: 158 };

    // pre-feedback plogp baseline
    let score_set = |label: &str, params: &Parameters<f32>, seed: u64| -> Vec<f64> {
        let out = generate_set(params, &alphabet, &hist, 1000, sampler, seed).unwrap();
        let scores: Vec<f64> = out
            .iter()
            .map(|s| plogp.score(&decode_selfies(s)))
            .filter(|v| v.is_finite())
            .collect();
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        println!("[{:.0}s] {label} mean plogp {mean:.4} over {}", t0.elapsed().as_secs_f64(), scores.len());
        scores
    };
    let pre = score_set("pre-feedback", params, 100);
    {
        // conditional similarity spot check
        use molforge::descriptors::{morgan_default, tanimoto};
        use molforge::model::sample;
        let mut sims = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for i in 0..50 {
            let fp = morgan_default(&graphs[i]);
            for _ in 0..4 {
                let out = sample(params, &alphabet, &seqs[i], sampler, &mut rng).unwrap();
                if out.is_empty() { continue; }
                sims.push(tanimoto(&fp, &morgan_default(&decode_selfies(&out))).unwrap());
            }
        }
        sims.sort_by(f64::total_cmp);
        println!(
            "conditional sim p50 {:.3} frac>=0.6 {:.2}",
            sims[sims.len() / 2],
            sims.iter().filter(|&&s| s >= 0.6).count() as f64 / sims.len() as f64
        );
    }

    // feedback arms
    let sources: Vec<_> = seqs.iter().take(256).cloned().collect();
    let mut run_arm = |alpha: f64, seed: u64| -> Parameters<f32> {
        let mut arm = params.clone();
        let fcfg = FeedbackConfig {
            alpha,
            k: 8,
            epochs: 2,
            batch_size: 8,
            learning_rate: 3e-5,
            warmup_steps: 8,
            seed,
            ..Default::default()
        };
        let rep = feedback_finetune(&mut arm, &sources, &alphabet, &plogp, &fcfg).unwrap();
        println!(
            "[{:.0}s] feedback alpha={alpha}: rank {:?} skipped {}",
            t0.elapsed().as_secs_f64(),
            rep.epoch_rank_losses,
            rep.skipped_degenerate
        );
        arm
    };
    let arm3 = run_arm(3.0, 11);
    let post3 = score_set("alpha=3", &arm3, 101);
    let arm0 = run_arm(0.0, 12);
    let post0 = score_set("alpha=0", &arm0, 102);

    let boot = |a: &[f64], b: &[f64]| -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut diffs: Vec<f64> = (0..2000)
            .map(|_| {
                use rand::Rng;
                let ma: f64 = (0..a.len()).map(|_| a[rng.gen_range(0..a.len())]).sum::<f64>() / a.len() as f64;
                let mb: f64 = (0..b.len()).map(|_| b[rng.gen_range(0..b.len())]).sum::<f64>() / b.len() as f64;
                mb - ma
            })
            .collect();
        diffs.sort_by(f64::total_cmp);
        (diffs[50], diffs[1949])
    };
    let (lo3, hi3) = boot(&pre, &post3);
    let (lo0, hi0) = boot(&pre, &post0);
    println!("alpha3 CI [{lo3:.3}, {hi3:.3}]  alpha0 CI [{lo0:.3}, {hi0:.3}]");

    // criterion 9: constrained optimization over 100 lowest-plogp molecules
    let mut scored: Vec<(f64, usize)> = graphs
        .iter()
        .enumerate()
        .map(|(i, g)| (plogp.score(g), i))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    for delta in [0.6, 0.4] {
        let mut improvements = Vec::new();
        let mut violations = 0;
        let mut failures = 0;
        for (rank, &(_, idx)) in scored.iter().take(100).enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(500 + rank as u64);
            let out = constrained_optimize(
                &arm3,
                &alphabet,
                &graphs[idx],
                &plogp,
                OptimizeConfig {
                    delta,
                    budget: 64,
                    sampler,
                    include_input: true,
                },
                &mut rng,
            )
            .unwrap();
            match out.best {
                Some(b) => {
                    if b.similarity < delta {
                        violations += 1;
                    }
                    improvements.push(out.improvement.unwrap());
                }
                None => failures += 1,
            }
        }
        let mean: f64 = improvements.iter().sum::<f64>() / improvements.len().max(1) as f64;
        let strict = improvements.iter().filter(|&&x| x > 0.0).count();
        println!(
            "[{:.0}s] delta {delta}: mean improvement {mean:.3} strict {strict}/100 violations {violations} failures {failures}",
            t0.elapsed().as_secs_f64()
        );
    }
    println!("[{:.0}s] done", t0.elapsed().as_secs_f64());
}
