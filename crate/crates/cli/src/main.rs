//! `placebench` command-line pipeline.
//!
//! Exit codes: 0 ok, 1 usage, 2 data error, 3 transport error.

mod commands;
mod config;
mod io;
mod records;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("transport: {0}")]
    Transport(String),
}

impl CliError {
    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Transport(_) => 3,
        }
    }
}

impl From<placebench::Error> for CliError {
    fn from(e: placebench::Error) -> Self {
        match e {
            placebench::Error::Transport(t) => CliError::Transport(t.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<placebench::modelclient::TransportError> for CliError {
    fn from(e: placebench::modelclient::TransportError) -> Self {
        CliError::Transport(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "placebench",
    version,
    about = "Analog placement datasets, prompts, evaluation and scoring"
)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for batch stages (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a dataset.
    Gen(GenArgs),
    /// Build masked records from a dataset.
    Mask(MaskArgs),
    /// Render prompts.
    Prompt(PromptArgs),
    /// Send prompts to a model endpoint or replay recorded answers.
    Eval(EvalArgs),
    /// Recover placements from raw model outputs.
    Extract(ExtractArgs),
    /// Score placements against a gold dataset.
    Score(ScoreArgs),
    /// Exact-match accuracy of raw outputs against prompt answers.
    Accuracy(AccuracyArgs),
    /// Place a dataset's specs with a deterministic baseline.
    Baseline(BaselineArgs),
    /// Draw one record as SVG.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Netlist,
    Toy,
    V1,
    V2,
    V3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ToyKindArg {
    Grid4th,
    IndexN,
    CountMasks,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub kind: GenKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Toy task, overriding the config file.
    #[arg(long = "kind")]
    pub toy_kind: Option<ToyKindArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MaskKind {
    Subgroup,
    Layout,
}

#[derive(Debug, Args)]
pub struct MaskArgs {
    pub kind: MaskKind,
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Components to mask per netlist.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PromptKind {
    V1,
    V2,
    V3,
    Masking,
}

#[derive(Debug, Args)]
pub struct PromptArgs {
    pub kind: PromptKind,
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Few-shot examples (default: other records of the input).
    #[arg(long)]
    pub examples: Option<PathBuf>,
    /// Number of few-shot examples.
    #[arg(long)]
    pub shots: Option<usize>,
    /// v1: records given before the one to predict (default: all but the last).
    #[arg(long)]
    pub prefix_len: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, alias = "in")]
    pub prompts: PathBuf,
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Environment variable holding the endpoint.
    #[arg(long, default_value = "MODEL_ENDPOINT")]
    pub endpoint_env: String,
    #[arg(long)]
    pub model: Option<String>,
    /// Serve answers from this fixture directory instead of the network.
    #[arg(long, conflicts_with = "record")]
    pub replay: Option<PathBuf>,
    /// Save every exchange to this fixture directory.
    #[arg(long)]
    pub record: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Ask a judge model when the deterministic cascade fails.
    #[arg(long)]
    pub judge: bool,
    #[arg(long, conflicts_with = "record")]
    pub replay: Option<PathBuf>,
    #[arg(long)]
    pub record: Option<PathBuf>,
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gold: PathBuf,
    /// TOML file with scoring rules (overrides the config's [rules]).
    #[arg(long)]
    pub rules: Option<PathBuf>,
    /// CSV report.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-record reports as JSONL.
    #[arg(long)]
    pub reports: Option<PathBuf>,
    /// Summary as JSON (always also printed to stderr).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AccuracyArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Column,
    Mirror,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Algo::Column)]
    pub algo: Algo,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Predictions aligned line by line with the input.
    #[arg(long)]
    pub pred: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    /// Skip grid lines even when the record has a grid.
    #[arg(long)]
    pub no_grid: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
