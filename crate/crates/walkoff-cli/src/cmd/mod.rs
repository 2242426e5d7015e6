//! Subcommand argument definitions and dispatch.

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod cohort;
pub mod estimate;
pub mod parse;
pub mod simulate;
pub mod synth_validate;

/// Play-by-play ingestion, cohort extraction, effect estimation, and the
/// extra-innings bunt simulator.
#[derive(Debug, Parser)]
#[command(name = "walkoff", version, about = "Does bunting the ghost runner over win tied extra innings? Parse the event files, build the cohort, weigh the evidence.", long_about = None)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse event files and replay every game, reporting inconsistencies
    Parse(ParseArgs),
    /// Extract the tied-extra-inning cohort and attach covariates
    Cohort(CohortArgs),
    /// Estimate the bunt effect (crude and IPW) from a cohort CSV
    Estimate(EstimateArgs),
    /// Solve and sample the half-inning model; game-length and season value
    Simulate(SimulateArgs),
    /// Certify the estimator against synthetic data with known answers
    SynthValidate(SynthValidateArgs),
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    /// Event files or directories containing .EVN/.EVA files
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    /// Write per-play context rows (CSV) here
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed recorded in the manifest (parsing itself is deterministic)
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CohortArgs {
    /// Event files or directories
    #[arg(long, required = true, num_args = 1..)]
    pub events: Vec<PathBuf>,
    /// Lahman-style Batting.csv
    #[arg(long)]
    pub batting: PathBuf,
    /// Lahman-style Pitching.csv
    #[arg(long)]
    pub pitching: PathBuf,
    /// Seasons to include, comma-separated (ghost-runner era only)
    #[arg(long, value_delimiter = ',', required = true)]
    pub seasons: Vec<u16>,
    /// Output cohort CSV path
    #[arg(long)]
    pub out: PathBuf,
    /// Per-arm sample size for the strategy-switching audit
    #[arg(long, default_value_t = 30)]
    pub audit_n: usize,
    /// Optional covariate dump (player_id,season,ops,sac_rate,era)
    #[arg(long)]
    pub covariates_out: Option<PathBuf>,
    /// Run seed (falls back to WALKOFF_SEED, then a fixed constant)
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightsArg {
    /// 1/e for bunts, 1/(1-e) for swings (pseudo-population)
    Pseudo,
    /// 1/e for every record (sensitivity analysis)
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    /// exp(treatment coefficient) from the weighted outcome model
    Conditional,
    /// standardized marginal odds ratio (g-computation over the cohort)
    Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CiArg {
    /// nonparametric bootstrap percentile (default)
    Bootstrap,
    /// uncorrected weighted-likelihood Wald interval
    Wald,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Cohort CSV (the interchange format written by `cohort`)
    pub cohort: PathBuf,
    /// Propensity trimming window, e.g. 0.1,0.9 (closed interval)
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0.1, 0.9])]
    pub trim: Vec<f64>,
    /// Bootstrap replicates
    #[arg(long, default_value_t = 2000)]
    pub boot: usize,
    /// Run seed (falls back to WALKOFF_SEED, then a fixed constant)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for CSV artifacts (effects, histogram, models, balance)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = WeightsArg::Pseudo)]
    pub weights: WeightsArg,
    #[arg(long, value_enum, default_value_t = ScaleArg::Conditional)]
    pub scale: ScaleArg,
    #[arg(long, value_enum, default_value_t = CiArg::Bootstrap)]
    pub ci: CiArg,
    /// Confidence level
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Ridge added to the information diagonal, a diagnostic fallback for
    /// near-separated fits (0 = off, surfacing separation as an error)
    #[arg(long, default_value_t = 0.0)]
    pub ridge: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Event-model config (key=value); built-in defaults when omitted
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Probability a given extra inning ends the game
    #[arg(long, default_value_t = 0.72)]
    pub r: f64,
    /// Probability an attempted sacrifice succeeds (overrides the config)
    #[arg(long)]
    pub sac_success: Option<f64>,
    /// Qualifying situations per team-season for the uplift formula
    #[arg(long, default_value_t = 4.15)]
    pub n_situations: f64,
    /// Home team's eventual win probability after a scoreless inning
    #[arg(long, default_value_t = 0.5)]
    pub p_continue_win: f64,
    /// Monte Carlo trials per state
    #[arg(long, default_value_t = 1_000_000)]
    pub mc_trials: u64,
    /// Run seed (falls back to WALKOFF_SEED, then a fixed constant)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the effective model config here and exit
    #[arg(long)]
    pub dump_model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthValidateArgs {
    /// Synthetic-spec config (key=value); documented defaults when omitted
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Cohort size per repetition
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Recovery repetitions
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    /// Run seed (falls back to WALKOFF_SEED, then a fixed constant)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the effective spec here and exit
    #[arg(long)]
    pub dump_spec: Option<PathBuf>,
    /// Write one generated cohort (size --emit-n) as a cohort CSV and exit
    #[arg(long)]
    pub emit_cohort: Option<PathBuf>,
    /// Cohort size for --emit-cohort
    #[arg(long, default_value_t = 300)]
    pub emit_n: usize,
}

/// What a subcommand hands back to `main`: the full stdout text and the
/// process exit code.
pub struct CommandOutput {
    pub text: String,
    pub exit_code: i32,
}

impl CommandOutput {
    pub fn ok(text: String) -> CommandOutput {
        CommandOutput { text, exit_code: 0 }
    }
}

pub fn run(cli: &Cli) -> Result<CommandOutput> {
    match &cli.command {
        Command::Parse(args) => parse::run(args),
        Command::Cohort(args) => cohort::run(args),
        Command::Estimate(args) => estimate::run(args),
        Command::Simulate(args) => simulate::run(args),
        Command::SynthValidate(args) => synth_validate::run(args),
    }
}
