mod commands;
mod error;
mod provenance;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use adsched_core::sampler::Regime;

#[derive(Debug, Parser)]
#[command(name = "adsched", version, about = "Batch scheduling, codebooks and metrics for audio instruction tuning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a k-means codebook over max-pooled embeddings and assign every sample.
    BuildCodebook(BuildCodebookArgs),
    /// Emit a batch plan for the configured regime.
    PlanBatches(PlanArgs),
    /// Re-check a plan against every sampler invariant.
    ValidatePlan(ValidateArgs),
    /// Score reference/hypothesis pairs.
    Eval(EvalArgs),
    /// Per-task counts, hours and label histograms of a manifest.
    Stats(StatsArgs),
    /// Write LLM-judge request payloads (no network calls).
    EmitJudgeRequests(JudgeArgs),
}

#[derive(Debug, Args)]
pub struct BuildCodebookArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory holding `<embedding_ref>` frame files.
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub k: usize,
    #[arg(long, default_value_t = 0.03)]
    pub subset_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Regime config file plus command-line overrides.
#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// TOML regime config. Without it, --regime, --batch-size and
    /// --total-steps are required.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub regime: Option<Regime>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub total_steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub switch_step: Option<usize>,
    /// Defaults to 0.2 unless the config sets it.
    #[arg(long)]
    pub replay_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub codebook: Option<PathBuf>,
    /// Annotate every batch with its scheduled learning rate.
    #[arg(long)]
    pub emit_lr: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub plan: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub codebook: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Wer,
    F1,
    Rouge,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(value_enum)]
    pub metric: Metric,
    /// JSONL with `id, reference, hypothesis, task, lang` per line.
    #[arg(long)]
    pub pairs: PathBuf,
    /// Summary report; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-item scores as JSONL.
    #[arg(long)]
    pub per_item: Option<PathBuf>,
    /// Keep English casing instead of lowercasing.
    #[arg(long)]
    pub keep_case: bool,
    /// Drop punctuation before tokenizing.
    #[arg(long)]
    pub strip_punct: bool,
    /// WER quality-gate threshold (strict).
    #[arg(long, default_value_t = 0.15)]
    pub threshold: f64,
    /// Alternative label alias table for f1.
    #[arg(long)]
    pub aliases: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum JudgeKind {
    Summary,
    Translation,
}

#[derive(Debug, Args)]
pub struct JudgeArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long, value_enum)]
    pub kind: JudgeKind,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::BuildCodebook(a) => commands::codebook::run(&a),
        Command::PlanBatches(a) => commands::plan::run(&a),
        Command::ValidatePlan(a) => commands::validate::run(&a),
        Command::Eval(a) => commands::eval::run(&a),
        Command::Stats(a) => commands::stats::run(&a),
        Command::EmitJudgeRequests(a) => commands::judge::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let kind = if f.exit_code() == 1 { "validation failed" } else { "error" };
            eprintln!("{kind}: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
