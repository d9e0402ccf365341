//! `molforge generate`: sample molecules from a checkpoint.

use crate::exit::CliError;
use crate::report::write_report;
use clap::Args;
use molforge::lang::{decode_selfies, write_smiles, Alphabet};
use molforge::model::{checkpoint, SamplerConfig};
use molforge::train::generate_set;
use std::path::PathBuf;

#[derive(Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Number of molecules to sample.
    #[arg(short, long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
    #[arg(long, default_value_t = 0)]
    pub top_k: usize,
    /// Output file: one `SELFIES<TAB>SMILES` line per molecule.
    #[arg(short, long, default_value = "generated.txt")]
    pub out: PathBuf,
}

pub fn run(args: GenerateArgs) -> Result<(), CliError> {
    let (params, meta) = checkpoint::load(&args.checkpoint)?;
    let alphabet = Alphabet::from_json(
        &serde_json::to_string(&meta.alphabet).expect("strings serialize"),
    )
    .map_err(CliError::data)?;
    let sampler = SamplerConfig {
        temperature: args.temperature,
        top_k: args.top_k,
        max_tokens: params.config.max_len - 2,
    };
    let seqs = generate_set(
        &params,
        &alphabet,
        &meta.length_hist,
        args.n,
        sampler,
        args.seed,
    )?;
    let mut lines = String::new();
    for seq in &seqs {
        let graph = decode_selfies(seq);
        lines.push_str(&seq.to_text());
        lines.push('\t');
        lines.push_str(&write_smiles(&graph));
        lines.push('\n');
    }
    std::fs::write(&args.out, lines)?;
    write_report(
        &args.out.with_extension("report.json"),
        "generate",
        Some(args.seed),
        serde_json::json!({
            "checkpoint": args.checkpoint.display().to_string(),
            "n": args.n,
            "temperature": args.temperature,
            "top_k": args.top_k,
        }),
        serde_json::json!({ "written": seqs.len() }),
    )?;
    println!("wrote {} molecules to {}", seqs.len(), args.out.display());
    Ok(())
}
