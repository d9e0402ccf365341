//! Scratch probe for training throughput (dev aid).

use molforge::corpus::load_corpus;
use molforge::lang::Alphabet;
use molforge::model::{ModelConfig, Parameters};
use molforge::train::{pretrain, PretrainConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn main() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/corpus10k.smi");
    let corpus = load_corpus(&path).expect("corpus loads");
    let seqs = corpus.token_seqs();
    let subset = &seqs[..1000];
    let alphabet = Alphabet::build(subset.iter()).unwrap();
    println!("alphabet size {}", alphabet.len());

    let mut params: Parameters<f32> = Parameters::init(
        ModelConfig::compact(alphabet.len()),
        &mut ChaCha8Rng::seed_from_u64(1),
    );
    let cfg = PretrainConfig {
        epochs: 1,
        batch_size: 64,
        seed: 1,
        ..Default::default()
    };
    let t0 = Instant::now();
    let report = pretrain(&mut params, subset, &alphabet, &cfg, None).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    println!(
        "1 epoch over 1000 molecules: {dt:.1}s  loss {:?}",
        report.epoch_losses
    );
    println!(
        "projected 10k x 20 epochs: {:.0} min",
        dt * 10.0 * 20.0 / 60.0
    );
}
