//! `maxmin`: experiments for online max-min fair allocation.
//!
//! Subcommands: `run` (one experiment), `sweep` (size grid), `iid`
//! (Monte-Carlo i.i.d. estimate), `verify` (guarantee suites), `oracle`
//! (solve one instance file exactly).
//!
//! Exit codes: 0 success, 1 runtime error, 2 config error, 3 verification
//! failure, 4 oracle-budget downgrade (warning level).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{EXIT_CONFIG, EXIT_RUNTIME};
use config::{load_config_file, merge, resolve, FlagOverrides, Needs, RawConfig};

#[derive(Parser)]
#[command(name = "maxmin", about = "Online max-min fair allocation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonFlags {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Algorithm name: random, round_robin, greedy, pass_chain, discounted.
    #[arg(long)]
    algorithm: Option<String>,
    /// Algorithm epsilon (pass_chain, discounted).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Greedy potential: identity, sqrt, log1p, power:<p>.
    #[arg(long)]
    phi: Option<String>,
    /// Master seed (the MAXMIN_SEED env var overrides this).
    #[arg(long)]
    seed: Option<u64>,
    /// Source name, or replay:<path> for an instance file.
    #[arg(long)]
    source: Option<String>,
    /// Agent count parameter.
    #[arg(long)]
    n: Option<usize>,
    /// Item count parameter (i.i.d. horizons).
    #[arg(long)]
    m: Option<usize>,
    /// Size parameter (two_phase phase length; greedy_killer 1/eps).
    #[arg(long)]
    k: Option<usize>,
    /// Deficiency adversary exponent, in (1/2, 1).
    #[arg(long)]
    r: Option<f64>,
    /// Deficiency adversary shortfall, positive.
    #[arg(long)]
    c: Option<f64>,
    /// Trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads (default: available cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Oracle node budget.
    #[arg(long)]
    oracle_budget: Option<u64>,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment: trials of one algorithm against one source.
    Run(CommonFlags),
    /// Sweep a sized source family over the config's size_grid.
    Sweep(CommonFlags),
    /// Monte-Carlo estimate under i.i.d. arrivals (ratio of means).
    Iid(CommonFlags),
    /// Run the guarantee suites (utility floor, chance counts, ratio
    /// sanity); nonzero exit on any failure.
    Verify(CommonFlags),
    /// Solve one JSONL instance file exactly and print the result.
    Oracle {
        /// Instance file in JSON Lines form.
        file: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
}

impl CommonFlags {
    fn overrides(&self) -> FlagOverrides {
        FlagOverrides {
            algorithm: self.algorithm.clone(),
            epsilon: self.epsilon,
            phi: self.phi.clone(),
            seed: self.seed,
            source: self.source.clone(),
            n: self.n,
            m: self.m,
            k: self.k,
            r: self.r,
            c: self.c,
            trials: self.trials,
            workers: self.workers,
            oracle_budget: self.oracle_budget,
            out: self.out.clone(),
        }
    }
}

fn resolved(flags: &CommonFlags, needs: Needs) -> Result<config::Experiment, config::ConfigError> {
    let file = match &flags.config {
        Some(path) => load_config_file(path)?,
        None => RawConfig::default(),
    };
    let merged = merge(file, &flags.overrides())?;
    resolve(&merged, needs)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(flags) => resolved(flags, Needs::Run).map(|exp| commands::cmd_run(&exp)),
        Command::Sweep(flags) => resolved(flags, Needs::Sweep).map(|exp| commands::cmd_sweep(&exp)),
        Command::Iid(flags) => resolved(flags, Needs::Iid).map(|exp| commands::cmd_iid(&exp)),
        Command::Verify(flags) => {
            resolved(flags, Needs::Verify).map(|exp| commands::cmd_verify(&exp))
        }
        Command::Oracle { file, flags } => {
            resolved(flags, Needs::Oracle).map(|exp| commands::cmd_oracle(file, exp.oracle_budget))
        }
    };
    match result {
        Err(config_error) => {
            eprintln!("config error: {config_error}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
        Ok(Err(runtime_error)) => {
            eprintln!("error: {runtime_error}");
            ExitCode::from(EXIT_RUNTIME as u8)
        }
        Ok(Ok(outcome)) => ExitCode::from(outcome.exit_code as u8),
    }
}
