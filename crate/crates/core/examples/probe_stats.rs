//! Scratch probe for corpus statistics (dev aid, not part of the pipeline).

use molforge::corpus::load_corpus;
use molforge::descriptors::{qed, FragmentTable};
use molforge::lang::{mutation_validity_rate, Language};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/corpus10k.smi");
    let corpus = load_corpus(&path).expect("corpus loads");
    println!("loaded {} molecules, skipped {}", corpus.len(), corpus.skipped.len());

    let graphs = corpus.graphs();
    let mws: Vec<f64> = graphs.iter().map(molforge::graph::molecular_weight).collect();
    let mean_mw = mws.iter().sum::<f64>() / mws.len() as f64;
    let qeds: Vec<f64> = graphs.iter().take(2000).map(qed).collect();
    let mean_qed = qeds.iter().sum::<f64>() / qeds.len() as f64;
    let max_qed = qeds.iter().cloned().fold(0.0, f64::max);
    println!("MW mean {mean_mw:.1}; QED mean {mean_qed:.3} max {max_qed:.3}");

    let lens: Vec<usize> = corpus.entries.iter().map(|e| e.tokens.len()).collect();
    let mean_len = lens.iter().sum::<usize>() as f64 / lens.len() as f64;
    let max_len = lens.iter().max().unwrap();
    println!("SELFIES tokens mean {mean_len:.1} max {max_len}");

    let table = FragmentTable::build(graphs.iter().take(3000));
    let sas: Vec<f64> = graphs
        .iter()
        .take(1000)
        .map(|g| molforge::descriptors::sa_score(g, &table))
        .collect();
    let mean_sa = sas.iter().sum::<f64>() / sas.len() as f64;
    let max_sa = sas.iter().cloned().fold(1.0, f64::max);
    let min_sa = sas.iter().cloned().fold(10.0, f64::min);
    println!("SA mean {mean_sa:.2} range [{min_sa:.2}, {max_sa:.2}]");

    let texts: Vec<String> = corpus
        .entries
        .iter()
        .take(1000)
        .map(|e| e.text.clone())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let rate = mutation_validity_rate(&texts, Language::Smiles, 10, 1, &mut rng);
    println!("SMILES single-mutation validity: {rate:.4}");
    let selfies_texts: Vec<String> = corpus
        .entries
        .iter()
        .take(200)
        .map(|e| e.tokens.to_text())
        .collect();
    let rate = mutation_validity_rate(&selfies_texts, Language::Selfies, 5, 2, &mut rng);
    println!("SELFIES double-mutation validity: {rate:.4}");
}
