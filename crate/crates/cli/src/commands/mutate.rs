//! `molforge mutate-test`: the SELFIES/SMILES mutation-robustness harness.

use crate::exit::CliError;
use crate::report::write_report;
use clap::Args;
use molforge::corpus::load_corpus;
use molforge::lang::{mutation_validity_rate, Language};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;

#[derive(Args)]
pub struct MutateTestArgs {
    pub corpus: PathBuf,
    /// "selfies", "smiles", or "both".
    #[arg(long, default_value = "both")]
    pub language: String,
    /// Mutations per string.
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Trials per molecule.
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long, default_value = "mutate_report.json")]
    pub out: PathBuf,
}

pub fn run(args: MutateTestArgs) -> Result<(), CliError> {
    let corpus = load_corpus(&args.corpus)?;
    let smiles_lines: Vec<String> = corpus
        .entries
        .iter()
        .map(|e| molforge::lang::write_smiles(&e.graph))
        .collect();
    let selfies_lines: Vec<String> = corpus
        .entries
        .iter()
        .map(|e| e.tokens.to_text())
        .collect();

    let mut results = serde_json::Map::new();
    let run_lang = |lang: Language, lines: &[String], seed: u64| -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        mutation_validity_rate(lines, lang, args.trials, args.count, &mut rng)
    };
    match args.language.as_str() {
        "selfies" => {
            let rate = run_lang(Language::Selfies, &selfies_lines, args.seed);
            println!("selfies: {rate:.4}");
            results.insert("selfies".into(), rate.into());
        }
        "smiles" => {
            let rate = run_lang(Language::Smiles, &smiles_lines, args.seed);
            println!("smiles: {rate:.4}");
            results.insert("smiles".into(), rate.into());
        }
        "both" => {
            let selfies = run_lang(Language::Selfies, &selfies_lines, args.seed);
            let smiles = run_lang(Language::Smiles, &smiles_lines, args.seed + 1);
            println!("selfies: {selfies:.4}");
            println!("smiles: {smiles:.4}");
            results.insert("selfies".into(), selfies.into());
            results.insert("smiles".into(), smiles.into());
        }
        other => return Err(CliError::usage(format!("unknown language {other:?}"))),
    }
    write_report(
        &args.out,
        "mutate-test",
        Some(args.seed),
        serde_json::json!({
            "corpus": args.corpus.display().to_string(),
            "language": args.language,
            "count": args.count,
            "trials": args.trials,
            "molecules": corpus.len(),
        }),
        serde_json::Value::Object(results),
    )?;
    Ok(())
}
