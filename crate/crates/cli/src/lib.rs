//! Command-line front end: configuration ingestion, subcommand dispatch and
//! result files.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid configuration or
//! arguments, 3 search budget exhausted (partial output written and
//! flagged), 4 verification mismatch.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{run, CliError};
pub use config::{ConfigError, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "lyapmax", version, about = "Pressure, equilibrium and maximal Lyapunov exponent computations for matrix cocycles over shifts of finite type")]
pub struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output` in the configuration.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; overrides `threads` in the configuration.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Random seed; overrides `seed` in the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pressure brackets over the t grid and levels.
    Pressure {
        /// Also emit the uncertified spectral-sum estimate.
        #[arg(long)]
        experimental: bool,
    },
    /// Gibbs exponent, entropy and ground states along the t grid.
    Zerotemp,
    /// Bracket the maximal Lyapunov exponent.
    Maxexp,
    /// Monte Carlo exponent for a Bernoulli measure and continuity probe.
    Mc,
    /// Sample a trajectory and close it into a periodic orbit.
    Close,
    /// Recompute a witness exponent and compare it with a claimed value.
    Verify {
        /// Witness word, e.g. `01`.
        witness: String,
        /// Claimed exponent; checked to 1e-8 or to the precision written,
        /// whichever is looser.
        #[arg(long, allow_hyphen_values = true)]
        claim: String,
    },
}

/// Exit code for a run result.
pub fn exit_code(result: &Result<(), CliError>) -> i32 {
    match result {
        Ok(()) => 0,
        Err(e) => e.exit_code(),
    }
}
