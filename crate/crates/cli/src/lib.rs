//! `sumue` command-line pipeline: score a record corpus, evaluate PRR
//! tables, correlate them and render reports.

pub mod commands;
pub mod config;
pub mod output;
pub mod render;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::run;

/// Failure classes with distinct exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or configuration (exit 2).
    Usage(String),
    /// Input data could not be processed (exit 1).
    Data(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Data(e) => write!(f, "error: {e:#}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

impl From<sumue_core::Error> for CliError {
    fn from(e: sumue_core::Error) -> Self {
        CliError::Data(e.into())
    }
}

#[derive(Debug, Parser)]
#[command(name = "sumue", version, about = "Prediction-rejection evaluation of uncertainty scores for summarization")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for the PRR baseline and any sampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Random rankings drawn for the PRR baseline.
    #[arg(long, global = true)]
    pub alpha: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute uncertainty and NLG scores for the corpus.
    Score(ScoreArgs),
    /// Build a PRR table from stored scores.
    Evaluate(EvaluateArgs),
    /// Spearman correlation matrices and heatmaps of a PRR table.
    Correlate(CorrelateArgs),
    /// Write an LLM-judge prompt batch.
    EmitPrompts(EmitPromptsArgs),
    /// Add externally computed metric scores to the score store.
    IngestScores(IngestArgs),
    /// PRR against human error annotations.
    HumanEval(HumanEvalArgs),
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Comma-separated uncertainty methods (overrides the config).
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Comma-separated native NLG metrics (overrides the config).
    #[arg(long, value_delimiter = ',')]
    pub metrics: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentArg {
    UeNlg,
    UeHum,
    NlgHum,
}

#[derive(Debug, Args)]
pub struct Selection {
    /// Restrict to these uncertainty methods.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Restrict to these NLG metrics.
    #[arg(long, value_delimiter = ',')]
    pub metrics: Option<Vec<String>>,
    /// Evaluate on the ids shared by every selected score vector instead of
    /// failing when they differ (e.g. after judge rejections).
    #[arg(long)]
    pub intersect: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, value_enum, default_value = "ue-nlg")]
    pub experiment: ExperimentArg,
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    #[command(flatten)]
    pub selection: Selection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    Methods,
    Metrics,
    Both,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// PRR table JSON; defaults to `<out>/prr_table.json`.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    pub axis: AxisArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Wo,
    WiGt,
    WiIn,
    WiIngt,
}

#[derive(Debug, Args)]
pub struct EmitPromptsArgs {
    #[arg(long, value_enum)]
    pub variant: VariantArg,
    /// relevance, consistency, coherence, fluency or overall.
    #[arg(long)]
    pub dimension: String,
    /// Batch file; defaults to `<out>/prompts/<variant>_<dimension>.json`.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// `{"id", "score"}` JSONL.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub name: String,
    #[arg(long)]
    pub dimension: String,
}

#[derive(Debug, Args)]
pub struct HumanEvalArgs {
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    #[command(flatten)]
    pub selection: Selection,
}
