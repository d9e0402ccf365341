//! Scratch probe: the corpus's own leave-out SNN ceiling (dev aid).

use molforge::corpus::load_corpus;
use molforge::metrics;

fn main() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/corpus10k.smi");
    let corpus = load_corpus(&path).expect("corpus loads");
    let graphs = corpus.graphs();
    // held-out molecules vs the rest: the natural SNN ceiling for a perfect
    // distribution learner
    let held: Vec<_> = graphs[..500].to_vec();
    let rest: Vec<_> = graphs[500..].to_vec();
    let snn = metrics::snn(&held, &rest).unwrap();
    println!("train leave-out SNN (500 vs 9500): {snn:.4}");
}
