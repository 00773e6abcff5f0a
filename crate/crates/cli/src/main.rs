//! `spoofcm` — drive the anti-spoofing experiment pipeline as replayable
//! subcommands. Every artifact (corpus, degraded audio, features,
//! checkpoints, scores, reports) is a file derived deterministically from
//! one config and its seeds.

mod cmd;
mod config;
mod failure;
mod sources;
mod stamp;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use failure::{CmdResult, Failure};

#[derive(Parser)]
#[command(name = "spoofcm", version, about = "Anti-spoofing countermeasure experiment pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (TOML); relative paths inside it resolve
    /// against its directory
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the master seed (per-stage seed overrides are ignored)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for degrade/extract (default: one per core)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Rebuild outputs that already exist
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic toy corpus (audio + manifest)
    Synth,
    /// Apply the codec plan to the corpus, writing degraded audio
    Degrade,
    /// Extract features into the cache
    Extract,
    /// Train an encoder + loss head; writes checkpoint and loss trace
    Train,
    /// Score a manifest with a trained checkpoint
    Score,
    /// Weighted fusion of score files
    Fuse,
    /// Per-condition EER report from scores + plan
    Report,
}

fn run(cli: Cli) -> CmdResult<()> {
    let config_path = cli
        .config
        .ok_or_else(|| Failure::config("--config is required"))?;
    let cfg = ExperimentConfig::load(&config_path, cli.seed)?;
    match cli.command {
        Command::Synth => cmd::synth::run(&cfg, cli.force),
        Command::Degrade => cmd::degrade::run(&cfg, cli.jobs, cli.force),
        Command::Extract => cmd::extract::run(&cfg, cli.jobs, cli.force),
        Command::Train => cmd::train::run(&cfg),
        Command::Score => cmd::score::run(&cfg),
        Command::Fuse => cmd::fuse::run(&cfg),
        Command::Report => cmd::report::run(&cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => failure.report(),
    }
}
