//! `sotkit` command-line tool.
//!
//! Exit codes: 0 on success, 1 when the input data or arguments are invalid,
//! 2 on I/O failures. Diagnostics go to stderr; data goes to stdout or to the
//! requested output files.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::CliError;

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (format sotkit/1)");

#[derive(Debug, Parser)]
#[command(name = "sotkit", version = VERSION, about = "Multi-talker transcription evaluation toolkit")]
pub struct Cli {
    /// Worker threads (0 = one per core). Output order never depends on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment sessions into utterance groups.
    Group {
        #[arg(long = "in")]
        input: std::path::PathBuf,
        /// Output JSONL; `-` writes to stdout.
        #[arg(long)]
        out: std::path::PathBuf,
    },
    /// Print utterance-group statistics bucketed by speaker count.
    Stats {
        #[arg(long)]
        groups: std::path::PathBuf,
        #[arg(long)]
        utterances: std::path::PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Serialized output training labels.
    #[command(subcommand)]
    Sot(SotCommand),
    /// Simulate overlapped multi-talker mixtures from a single-speaker pool.
    Simulate(SimulateArgs),
    /// Score hypotheses (utterance or utterance-group evaluation).
    Score(ScoreArgs),
}

#[derive(Debug, Subcommand)]
pub enum SotCommand {
    /// Serialize each group's references into one token sequence.
    Encode {
        #[arg(long)]
        groups: std::path::PathBuf,
        #[arg(long)]
        utterances: std::path::PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, default_value = "-")]
        out: std::path::PathBuf,
    },
    /// Split serialized hypotheses into per-speaker texts.
    Decode {
        #[arg(long = "in")]
        input: std::path::PathBuf,
        #[arg(long, default_value = "-")]
        out: std::path::PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Speaker,
    Utterance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScoreMode {
    Group,
    Utterance,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub pool: std::path::PathBuf,
    #[arg(long)]
    pub out_dir: std::path::PathBuf,
    #[arg(long)]
    pub count: usize,
    /// Required; there is no time-based default.
    #[arg(long)]
    pub seed: u64,
    /// Draw the speed factor from {low, mid, high} instead of the continuous range.
    #[arg(long)]
    pub speed_discrete: bool,
    /// TOML file with simulation settings; flags given here take precedence.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    #[arg(long)]
    pub max_speakers: Option<usize>,
    #[arg(long)]
    pub min_start_gap: Option<f64>,
    #[arg(long)]
    pub speed_low: Option<f64>,
    #[arg(long)]
    pub speed_high: Option<f64>,
    #[arg(long)]
    pub max_retries: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long, value_enum)]
    pub mode: ScoreMode,
    /// Reference utterances JSONL.
    #[arg(long)]
    pub refs: std::path::PathBuf,
    /// Groups JSONL (group mode only).
    #[arg(long)]
    pub groups: Option<std::path::PathBuf>,
    #[arg(long)]
    pub hyps: std::path::PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("sotkit: {err}");
            match err {
                CliError::Validation(_) => ExitCode::from(1),
                CliError::Io(_) => ExitCode::from(2),
            }
        }
    }
}
