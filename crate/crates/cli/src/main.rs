mod commands;
mod config;
mod error;
mod logfile;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Parser)]
#[command(
    name = "lengthwise",
    version,
    about = "Difficulty-aware length shaping for RL rollouts"
)]
pub struct Cli {
    /// TOML configuration file; missing keys take their defaults.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Root seed for every random stream (overrides `seed` in the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (overrides `out_dir` in the config).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Override one config key, e.g. `--set shaping.alpha_base=0.3`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Report format for `advantage`.
    #[arg(long, global = true, value_enum, default_value_t = Format::Jsonl)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shape advantages for every group in a rollout log.
    Advantage {
        /// Line-delimited JSON rollout log.
        log: PathBuf,
        /// Training step used for the cyclical factor.
        #[arg(long, default_value_t = 0)]
        step: u64,
    },
    /// Run the synthetic training simulator and write its trace.
    Simulate {
        /// Also run the naive scheme from the same seed and compare.
        #[arg(long)]
        paired: bool,
    },
    /// Monte Carlo check of the naive scheme's penalty scaling.
    Distortion,
    /// Majority-voting accuracy per token budget.
    Vote {
        /// Labeled rollout log.
        log: PathBuf,
        /// Comma-separated budgets (overrides `vote.budgets`).
        #[arg(long, value_delimiter = ',')]
        budgets: Option<Vec<u64>>,
    },
    /// Print the effective configuration as TOML.
    Config {
        /// Print the built-in defaults instead.
        #[arg(long)]
        defaults: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.kind, e.message);
            ExitCode::from(e.kind.exit_code() as u8)
        }
    }
}
