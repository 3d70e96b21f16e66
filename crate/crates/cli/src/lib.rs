//! Command-line driver: argument handling, reproducible runs and CSV/JSON
//! artifacts for every analysis in [`spinmarket`].

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod paper_table;

use std::ffi::OsString;

use clap::{Args, Parser, Subcommand};

use config::{CommonArgs, RunConfig};
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "spinmarket", version, about = "Randomized-neighborhood spin market toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Submartingale boundaries g1..g4.
    Regions(RegionsArgs),
    /// Stationary law of the buyer count, optionally against a simulated path.
    Invariant(InvariantArgs),
    /// Simulated path with wealth, price and boundary crossings.
    Simulate(PlainArgs),
    /// Mean and standard deviation of the one-step wealth increment.
    Frontier(PlainArgs),
    /// Sojourn samples and tail fits at g1, N/2 and g4.
    Sojourn(SojournArgs),
    /// Regions and stationary summaries over a grid of (alpha, lambda).
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct PlainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct RegionsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Recompute the published N=128, d=2 table and diff against it.
    #[arg(long)]
    pub paper_table: bool,
}

#[derive(Debug, Args)]
pub struct InvariantArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Fraction of the path discarded before counting occupancy.
    #[arg(long)]
    pub burn_in: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SojournArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Leading samples dropped per reference state.
    #[arg(long)]
    pub discard: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated alpha values.
    #[arg(long)]
    pub alphas: Option<String>,
    /// Comma-separated lambda values.
    #[arg(long)]
    pub lambdas: Option<String>,
    /// Sweep the cells of the published table instead of a grid.
    #[arg(long)]
    pub paper_table: bool,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
}

pub fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Regions(a) => commands::regions::run(&RunConfig::resolve(&a.common, &[])?, a.paper_table),
        Command::Invariant(a) => {
            let mut cfg = RunConfig::resolve(&a.common, &[("steps", "100000")])?;
            cfg.override_extra("burn_in", a.burn_in.map(|x| x.to_string()));
            commands::invariant::run(&cfg)
        }
        Command::Simulate(a) => commands::simulate::run(&RunConfig::resolve(&a.common, &[])?),
        Command::Frontier(a) => commands::frontier::run(&RunConfig::resolve(&a.common, &[("steps", "0")])?),
        Command::Sojourn(a) => {
            let mut cfg = RunConfig::resolve(&a.common, &[("steps", "1000000")])?;
            cfg.override_extra("discard", a.discard.map(|x| x.to_string()));
            commands::sojourn::run(&cfg)
        }
        Command::Sweep(a) => {
            let mut cfg = RunConfig::resolve(&a.common, &[("steps", "0")])?;
            cfg.override_extra("alphas", a.alphas);
            cfg.override_extra("lambdas", a.lambdas);
            commands::sweep::run(&cfg, a.paper_table, a.threads)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 success, 1 usage, 2 reference mismatch, 3 runtime.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
