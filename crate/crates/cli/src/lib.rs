//! Library surface of the experiment driver, so the binary stays thin and
//! integration tests can drive full runs in-process.

pub mod artifacts;
pub mod commands;
pub mod config;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::{ExperimentConfig, ResolvedConfig};

#[derive(Debug, Parser)]
#[command(
    name = "voltlab",
    about = "Grid voltage-control laboratory: power flow environment, SAC and imitation-learning experiments"
)]
pub struct Cli {
    /// Experiment config file (TOML); defaults apply when omitted
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Master seed override; re-derives every stage seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory override
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the synthetic case set and the train/test split
    Gen,
    /// Evaluate the random baseline policy on both splits
    Baseline,
    /// Train the soft actor-critic agent
    TrainSac,
    /// Collect successful steps and train the imitation-learning agent
    TrainIl,
    /// Per-case evaluation report for a policy checkpoint
    Eval {
        /// Path to a policy checkpoint written by train-sac or train-il
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Solvability labels and PCA projection of the case set
    Pca,
    /// Reward-engineering grid over strategies, r_plus values, and seeds
    Sweep,
}

pub fn resolve(cli: &Cli) -> Result<ResolvedConfig> {
    let config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    Ok(config.resolve(cli.seed, cli.out.clone()))
}

pub fn run(cli: Cli) -> Result<()> {
    let resolved = resolve(&cli)?;
    std::fs::create_dir_all(&resolved.out_dir)?;
    match &cli.command {
        Command::Gen => commands::run_gen(&resolved),
        Command::Baseline => commands::run_baseline(&resolved),
        Command::TrainSac => commands::run_train_sac(&resolved),
        Command::TrainIl => commands::run_train_il(&resolved),
        Command::Eval { checkpoint } => commands::run_eval(&resolved, checkpoint),
        Command::Pca => commands::run_pca(&resolved),
        Command::Sweep => commands::run_sweep(&resolved),
    }
}
