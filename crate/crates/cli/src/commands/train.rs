//! `molforge pretrain | prefix-stage | feedback`.

use crate::exit::CliError;
use crate::report::{merge_config, write_report};
use clap::Args;
use molforge::corpus::load_corpus;
use molforge::descriptors::{CorpusStats, FragmentTable, PropertyFunction, PropertyKind};
use molforge::lang::Alphabet;
use molforge::model::{checkpoint, ModelConfig, Parameters};
use molforge::train::{
    feedback_finetune, length_histogram, prefix_stage, pretrain, FeedbackConfig, PretrainConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Args)]
pub struct PretrainArgs {
    /// Training corpus.
    pub corpus: PathBuf,
    /// Alphabet JSON from `molforge build`.
    #[arg(long)]
    pub alphabet: PathBuf,
    /// Output directory for checkpoints and the run report.
    #[arg(long, default_value = "run-pretrain")]
    pub out_dir: PathBuf,
    /// JSON config file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub mask_rate: Option<f64>,
    #[arg(long)]
    pub warmup_steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Resume from an existing checkpoint instead of fresh initialization.
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

fn load_alphabet(path: &Path) -> Result<Alphabet, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    Alphabet::from_json(&text).map_err(CliError::data)
}

pub fn run_pretrain(args: PretrainArgs) -> Result<(), CliError> {
    let cfg = merge_config(args.config.as_deref(), PretrainConfig::default(), |mut c| {
        if let Some(v) = args.epochs {
            c.epochs = v;
        }
        if let Some(v) = args.batch_size {
            c.batch_size = v;
        }
        if let Some(v) = args.learning_rate {
            c.learning_rate = v;
        }
        if let Some(v) = args.mask_rate {
            c.mask_rate = v;
        }
        if let Some(v) = args.warmup_steps {
            c.warmup_steps = v;
        }
        if let Some(v) = args.seed {
            c.seed = v;
        }
        c
    })?;
    let alphabet = load_alphabet(&args.alphabet)?;
    let corpus = load_corpus(&args.corpus)?;
    let seqs = corpus.token_seqs();

    let mut params = match &args.resume {
        Some(path) => checkpoint::load(path)?.0,
        None => Parameters::init(
            ModelConfig::compact(alphabet.len()),
            &mut ChaCha8Rng::seed_from_u64(cfg.seed),
        ),
    };
    std::fs::create_dir_all(&args.out_dir)?;
    let report = pretrain(
        &mut params,
        &seqs,
        &alphabet,
        &cfg,
        Some(&args.out_dir.join("checkpoints")),
    )?;
    write_report(
        &args.out_dir.join("pretrain_report.json"),
        "pretrain",
        Some(cfg.seed),
        &cfg,
        &report,
    )?;
    println!(
        "pretrain done: {} steps, loss {:.4} -> {:.4}; checkpoints in {}",
        report.steps,
        report.epoch_losses.first().unwrap_or(&f64::NAN),
        report.epoch_losses.last().unwrap_or(&f64::NAN),
        args.out_dir.join("checkpoints").display()
    );
    Ok(())
}

#[derive(Args)]
pub struct PrefixStageArgs {
    /// Mixed-domain corpus.
    pub corpus: PathBuf,
    /// Checkpoint from the first stage.
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, default_value = "run-prefix")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Update only the prefix bank, leaving the backbone frozen.
    #[arg(long, default_value_t = false)]
    pub freeze_backbone: bool,
}

pub fn run_prefix_stage(args: PrefixStageArgs) -> Result<(), CliError> {
    let cfg = merge_config(args.config.as_deref(), PretrainConfig::default(), |mut c| {
        if let Some(v) = args.epochs {
            c.epochs = v;
        }
        if let Some(v) = args.batch_size {
            c.batch_size = v;
        }
        if let Some(v) = args.learning_rate {
            c.learning_rate = v;
        }
        if let Some(v) = args.seed {
            c.seed = v;
        }
        c
    })?;
    let (mut params, meta) = checkpoint::load(&args.checkpoint)?;
    let alphabet = Alphabet::from_json(
        &serde_json::to_string(&meta.alphabet).expect("strings serialize"),
    )
    .map_err(CliError::data)?;
    let corpus = load_corpus(&args.corpus)?;
    let seqs = corpus.token_seqs();
    std::fs::create_dir_all(&args.out_dir)?;
    let report = prefix_stage(
        &mut params,
        &seqs,
        &alphabet,
        &cfg,
        args.freeze_backbone,
        Some(&args.out_dir.join("checkpoints")),
    )?;
    write_report(
        &args.out_dir.join("prefix_stage_report.json"),
        "prefix-stage",
        Some(cfg.seed),
        &cfg,
        &report,
    )?;
    println!(
        "prefix stage done: {} steps, loss {:.4} -> {:.4}",
        report.steps,
        report.epoch_losses.first().unwrap_or(&f64::NAN),
        report.epoch_losses.last().unwrap_or(&f64::NAN),
    );
    Ok(())
}

#[derive(Args)]
pub struct FeedbackArgs {
    /// Source molecules for candidate generation.
    pub corpus: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Build artifacts directory (fragments.json + stats.json for plogp).
    #[arg(long, default_value = "build")]
    pub artifacts: PathBuf,
    #[arg(long, default_value = "run-feedback")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Property to optimize: plogp or qed.
    #[arg(long, default_value = "plogp")]
    pub property: String,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn load_property(
    kind: PropertyKind,
    artifacts: &Path,
) -> Result<PropertyFunction, CliError> {
    match kind {
        PropertyKind::Qed => Ok(PropertyFunction::qed()),
        PropertyKind::PenalizedLogp => {
            let table_text = std::fs::read_to_string(artifacts.join("fragments.json"))
                .map_err(|e| {
                    CliError::data(format!(
                        "missing fragment table (run `molforge build` first): {e}"
                    ))
                })?;
            let table = FragmentTable::from_json(&table_text).map_err(CliError::data)?;
            let stats_text = std::fs::read_to_string(artifacts.join("stats.json"))
                .map_err(|e| {
                    CliError::data(format!("missing stats (run `molforge build` first): {e}"))
                })?;
            let stats = CorpusStats::from_json(&stats_text).map_err(CliError::data)?;
            Ok(PropertyFunction::penalized_logp(Arc::new(table), stats))
        }
    }
}

pub fn run_feedback(args: FeedbackArgs) -> Result<(), CliError> {
    let kind = PropertyKind::parse(&args.property)
        .ok_or_else(|| CliError::usage(format!("unknown property {:?}", args.property)))?;
    let cfg = merge_config(args.config.as_deref(), FeedbackConfig::default(), |mut c| {
        if let Some(v) = args.alpha {
            c.alpha = v;
        }
        if let Some(v) = args.gamma {
            c.gamma = v;
        }
        if let Some(v) = args.beta {
            c.beta = v;
        }
        if let Some(v) = args.k {
            c.k = v;
        }
        if let Some(v) = args.epochs {
            c.epochs = v;
        }
        if let Some(v) = args.batch_size {
            c.batch_size = v;
        }
        if let Some(v) = args.learning_rate {
            c.learning_rate = v;
        }
        if let Some(v) = args.seed {
            c.seed = v;
        }
        c
    })?;
    let (mut params, mut meta) = checkpoint::load(&args.checkpoint)?;
    let alphabet = Alphabet::from_json(
        &serde_json::to_string(&meta.alphabet).expect("strings serialize"),
    )
    .map_err(CliError::data)?;
    let property = load_property(kind, &args.artifacts)?;
    let corpus = load_corpus(&args.corpus)?;
    let seqs = corpus.token_seqs();

    let report = feedback_finetune(&mut params, &seqs, &alphabet, &property, &cfg)?;
    std::fs::create_dir_all(&args.out_dir)?;
    meta.stage = format!("feedback:{}", kind.name());
    if meta.length_hist.is_empty() {
        meta.length_hist = length_histogram(&seqs);
    }
    checkpoint::save(&params, &meta, &args.out_dir.join("feedback.mgfk"))?;
    write_report(
        &args.out_dir.join("feedback_report.json"),
        "feedback",
        Some(cfg.seed),
        &cfg,
        &report,
    )?;
    println!(
        "feedback done: {} steps, {} degenerate sets skipped, rank loss {:.4} -> {:.4}",
        report.steps,
        report.skipped_degenerate,
        report.epoch_rank_losses.first().unwrap_or(&f64::NAN),
        report.epoch_rank_losses.last().unwrap_or(&f64::NAN),
    );
    Ok(())
}
