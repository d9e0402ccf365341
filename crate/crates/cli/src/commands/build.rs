//! `molforge build`: corpus -> alphabet + SA fragment table + corpus stats.

use crate::exit::CliError;
use crate::report::write_report;
use clap::Args;
use molforge::corpus::load_corpus;
use molforge::descriptors::{CorpusStats, FragmentTable};
use molforge::lang::Alphabet;
use serde::Serialize;
use std::path::PathBuf;

#[derive(Args)]
pub struct BuildArgs {
    /// Corpus file (one molecule per line).
    pub corpus: PathBuf,
    /// Output directory for alphabet.json, fragments.json, stats.json.
    #[arg(long, default_value = "build")]
    pub out_dir: PathBuf,
}

#[derive(Serialize)]
struct BuildSummary {
    molecules: usize,
    skipped: usize,
    skipped_lines: Vec<(usize, String)>,
    alphabet_size: usize,
    fragment_environments: usize,
}

pub fn run(args: BuildArgs) -> Result<(), CliError> {
    let corpus = load_corpus(&args.corpus)?;
    let seqs = corpus.token_seqs();
    let alphabet = Alphabet::build(seqs.iter()).map_err(CliError::data)?;
    let graphs = corpus.graphs();
    let table = FragmentTable::build(graphs.iter());
    let stats = CorpusStats::compute(graphs.iter(), &table);

    std::fs::create_dir_all(&args.out_dir)?;
    std::fs::write(args.out_dir.join("alphabet.json"), alphabet.to_json() + "\n")?;
    std::fs::write(args.out_dir.join("fragments.json"), table.to_json() + "\n")?;
    std::fs::write(args.out_dir.join("stats.json"), stats.to_json() + "\n")?;

    let summary = BuildSummary {
        molecules: corpus.len(),
        skipped: corpus.skipped.len(),
        skipped_lines: corpus.skipped.clone(),
        alphabet_size: alphabet.len(),
        fragment_environments: table.counts.len(),
    };
    write_report(
        &args.out_dir.join("build_report.json"),
        "build",
        None,
        serde_json::json!({ "corpus": args.corpus.display().to_string() }),
        &summary,
    )?;
    println!(
        "built alphabet ({} tokens), fragment table ({} environments), stats from {} molecules (skipped: {})",
        summary.alphabet_size, summary.fragment_environments, summary.molecules, summary.skipped
    );
    for (line, msg) in corpus.skipped.iter().take(20) {
        eprintln!("  skipped line {line}: {msg}");
    }
    Ok(())
}
