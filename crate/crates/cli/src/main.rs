use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod resolve;

use resolve::UsageError;

#[derive(Debug, Parser)]
#[command(name = "ammsim", version, about = "Train and evaluate fee/curvature controllers on a simulated hybrid AMM")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a learning agent and save metrics and Q-tables.
    Train(RunArgs),
    /// Run the static 0.17% / leverage 42 protocol.
    Baseline(RunArgs),
    /// Train with the tolerance mode switching halfway through.
    BehaviorChange(BehaviorArgs),
    /// Train every agent across a range of one parameter.
    Sweep(SweepArgs),
    /// Tabulate terminal rewards across run directories.
    Compare(CompareArgs),
}

/// Flags shared by every training subcommand. Each one overrides the
/// matching config-file value.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML config file.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// normal, loose, high-liquidity or behavior-change:<from>-to-<to>.
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Comma-separated list of seeds.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Environment steps between agent decisions.
    #[arg(long = "update-interval", short = 'k')]
    pub update_interval: Option<usize>,
    /// Output root.
    #[arg(long, env = "AMMSIM_OUT", default_value = "runs")]
    pub out: PathBuf,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long = "eps-max")]
    pub eps_max: Option<f64>,
    #[arg(long = "eps-min")]
    pub eps_min: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// fee-only, leverage-only, combined or baseline.
    #[arg(long)]
    pub agent: Option<String>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct BehaviorArgs {
    #[arg(long)]
    pub agent: Option<String>,
    /// Tolerance mode for the first half.
    #[arg(long, default_value = "loose")]
    pub from: String,
    /// Tolerance mode for the second half.
    #[arg(long, default_value = "normal")]
    pub to: String,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// swap-size, tolerance or update-interval.
    #[arg(long)]
    pub param: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
    /// Agents to train at each value; defaults to all four.
    #[arg(long, value_delimiter = ',')]
    pub agents: Option<Vec<String>>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Output roots written by train, baseline or behavior-change.
    #[arg(required = true, num_args = 1..)]
    pub dirs: Vec<PathBuf>,
    /// Directory for compare.csv.
    #[arg(long, env = "AMMSIM_OUT", default_value = "runs")]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Train(args) => commands::train(args, false),
        Command::Baseline(args) => commands::train(args, true),
        Command::BehaviorChange(args) => commands::behavior_change(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Compare(args) => commands::compare(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let config_error = err.downcast_ref::<UsageError>().is_some()
                || err.downcast_ref::<ammsim::Error>().is_some_and(ammsim::Error::is_config);
            ExitCode::from(if config_error { 1 } else { 2 })
        }
    }
}
