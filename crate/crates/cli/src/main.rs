//! molforge: train, generate, evaluate and optimize molecules from the
//! command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

mod commands;
mod exit;
mod report;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "molforge", version, about = "molecular generation toolkit")]
struct Cli {
    /// Worker thread cap (falls back to MOLFORGE_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build alphabet, SA fragment table and corpus stats from a corpus.
    Build(commands::build::BuildArgs),
    /// Stage-one masked-reconstruction pretraining.
    Pretrain(commands::train::PretrainArgs),
    /// Stage-two mixed-domain training (prefixes plus backbone).
    PrefixStage(commands::train::PrefixStageArgs),
    /// Chemical-feedback fine-tuning with the rank loss.
    Feedback(commands::train::FeedbackArgs),
    /// Sample molecules from a checkpoint.
    Generate(commands::generate::GenerateArgs),
    /// Distribution-learning metrics over generated/reference/training sets.
    Eval(commands::eval::EvalArgs),
    /// Constrained property optimization under a similarity bound.
    Optimize(commands::optimize::OptimizeArgs),
    /// Mutation-robustness comparison between SELFIES and SMILES.
    MutateTest(commands::mutate::MutateTestArgs),
    /// Substructure attention level over annotated molecules.
    Sal(commands::sal::SalArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders help/version on stdout with success
            if e.use_stderr() {
                eprintln!("{e}");
                std::process::exit(1);
            }
            print!("{e}");
            std::process::exit(0);
        }
    };

    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("MOLFORGE_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0);
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }

    let outcome = match cli.command {
        Command::Build(args) => commands::build::run(args),
        Command::Pretrain(args) => commands::train::run_pretrain(args),
        Command::PrefixStage(args) => commands::train::run_prefix_stage(args),
        Command::Feedback(args) => commands::train::run_feedback(args),
        Command::Generate(args) => commands::generate::run(args),
        Command::Eval(args) => commands::eval::run(args),
        Command::Optimize(args) => commands::optimize::run(args),
        Command::MutateTest(args) => commands::mutate::run(args),
        Command::Sal(args) => commands::sal::run(args),
    };

    match outcome {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
