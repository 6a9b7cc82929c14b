//! `qflab`: deterministic experiment driver for log-scale growth profiles,
//! escaping-orbit classification, voxel topology and engulfing certificates.
//!
//! Exit codes: 0 success, 1 computation failed, 2 configuration error,
//! 3 resource budget exceeded.

// Validation uses `!(x > bound)` deliberately: unlike `x <= bound`, the
// negated form also rejects NaN inputs.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod fixtures;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use error::CliError;

#[derive(Parser)]
#[command(
    name = "qflab",
    version,
    about = "Numerical laboratory for log-scale growth, escaping orbits and voxel topology \
             of quasiregular map families"
)]
struct Cli {
    /// Flat `key = value` configuration file (defaults apply when omitted).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory, overriding the configured `out_dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads for grid work; 0 picks automatically. Results are
    /// byte-identical for every thread count.
    #[arg(long, global = true, default_value_t = 0, value_name = "N")]
    threads: usize,

    /// Sampling seed, overriding the configured `seed`.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the knot table, the growth-condition sequence and the liminf
    /// ratio table.
    Profile,
    /// Record one orbit of the configured map as CSV.
    Orbit,
    /// Classify a seeded point cloud against the maximum-modulus ladder.
    Classify,
    /// Analyze a built-in voxel fixture: components, hull, hollowness and
    /// nested-web detection.
    Topology,
    /// Run the engulfing certificate on the configured annular region.
    Certify,
    /// Verify ring containment and run the wandering-ring experiment.
    Rings,
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::Computation(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Profile => commands::run_profile(&cfg),
        Command::Orbit => commands::run_orbit(&cfg),
        Command::Classify => commands::run_classify(&cfg),
        Command::Topology => commands::run_topology(&cfg),
        Command::Certify => commands::run_certify(&cfg),
        Command::Rings => commands::run_rings(&cfg),
    })
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
