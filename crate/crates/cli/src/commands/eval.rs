//! `molforge eval`: distribution-learning metric report.

use crate::exit::CliError;
use crate::report::write_report;
use clap::Args;
use molforge::corpus::parse_corpus_text;
use molforge::graph::MolecularGraph;
use molforge::metrics::evaluate_all;
use std::path::{Path, PathBuf};

#[derive(Args)]
pub struct EvalArgs {
    /// Generated molecules (SELFIES or SMILES lines; tab-separated columns
    /// use the first field).
    pub gen: PathBuf,
    /// Reference set.
    #[arg(long)]
    pub reference: PathBuf,
    /// Training set for novelty.
    #[arg(long)]
    pub train: PathBuf,
    #[arg(short, long, default_value = "eval_report.json")]
    pub out: PathBuf,
}

/// Generation files keep one attempt per line; unparseable lines count as
/// invalid attempts rather than being dropped.
fn load_attempts(path: &Path) -> Result<Vec<Option<MolecularGraph>>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let mut attempts = Vec::new();
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let first = line.split('\t').next().expect("split yields a field");
        let parsed = parse_corpus_text(first, "line");
        attempts.push(parsed.entries.into_iter().next().map(|e| e.graph));
    }
    if attempts.is_empty() {
        return Err(CliError::data(format!("{}: no molecules", path.display())));
    }
    Ok(attempts)
}

fn load_set(path: &Path) -> Result<Vec<MolecularGraph>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let corpus = parse_corpus_text(&text, &path.display().to_string());
    if corpus.is_empty() {
        return Err(CliError::data(format!("{}: no molecules", path.display())));
    }
    Ok(corpus.graphs())
}

pub fn run(args: EvalArgs) -> Result<(), CliError> {
    let gen = load_attempts(&args.gen)?;
    let reference = load_set(&args.reference)?;
    let train = load_set(&args.train)?;
    let report = evaluate_all(&gen, &reference, &train).map_err(CliError::data)?;
    for (name, value) in &report.metrics {
        match value {
            Some(v) => println!("{name}: {v:.4}"),
            None => println!("{name}: null"),
        }
    }
    write_report(
        &args.out,
        "eval",
        None,
        serde_json::json!({
            "gen": args.gen.display().to_string(),
            "reference": args.reference.display().to_string(),
            "train": args.train.display().to_string(),
        }),
        &report,
    )?;
    println!("report written to {}", args.out.display());
    Ok(())
}
