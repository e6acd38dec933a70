//! Single-binary front end for the repeated-game laboratory: a shared
//! key = value config grammar, six subcommands, manifested outputs.
//!
//! Exit codes: 0 success, 1 acceptance failure, 2 config error, 3 runtime
//! error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use thiserror::Error;

pub mod commands;
pub mod config;
pub mod manifest;

use config::{ConfigError, ExperimentConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// A subcommand precondition the config fails to meet; reported before
    /// any computation starts.
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Precondition(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<pennylab::probes::ProbeError> for CliError {
    fn from(e: pennylab::probes::ProbeError) -> Self {
        // Probes validate their arguments up front, so these are config
        // problems, not runtime faults.
        CliError::Precondition(e.to_string())
    }
}

impl From<pennylab::pmf::PmfError> for CliError {
    fn from(e: pennylab::pmf::PmfError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pennylab",
    version,
    about = "Seeded experiments on repeated 2x2 competitive games under no-regret learning"
)]
pub struct Cli {
    /// Config file of `key = value` lines; defaults apply to omitted keys.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Inline config override, e.g. --set steps=100000. Repeatable; applied
    /// after the file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    /// Worker threads for replica-level parallelism (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run seeded trajectories and write one checkpoint CSV per replica.
    Simulate,
    /// Scan engineered constant-tail lengths and report the mean next-step
    /// response (JSON).
    ProbeSensitivity,
    /// Estimate per-checkpoint last-iterate deviation frequencies over an
    /// ensemble (CSV).
    ProbeOscillation,
    /// Audit hindsight regret of both players over full-resolution replicas
    /// (CSV).
    AuditRegret,
    /// Emit exact pmf certificates (local-normal and change-of-measure) at
    /// the configured horizon (JSON).
    PmfTools {
        /// Also sample the configured matchup and test the realized count
        /// distribution against the iid and mixture models on a
        /// `gamma * sqrt(t)` window around the equilibrium count.
        #[arg(long)]
        empirical: bool,
    },
    /// Run the acceptance suite; exits 1 if any criterion fails.
    CheckAll {
        /// Include the long-horizon ensemble criteria (minutes, not
        /// seconds).
        #[arg(long)]
        full: bool,
    },
}

/// Parses arguments, loads the config, dispatches, and returns the process
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };

    if let Some(n) = cli.threads {
        // Ignore a second initialization (tests may call run() repeatedly).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    let config = match load_config(&cli) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("pennylab: {}", error_chain(&e));
            return 2;
        }
    };

    match commands::dispatch(&cli.command, &config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("pennylab: {}", error_chain(&e));
            e.exit_code()
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    match &cli.config {
        Some(path) => ExperimentConfig::from_file(path, &cli.set),
        None => ExperimentConfig::from_sources("", &cli.set),
    }
}

// Errors carry their cause chain; flatten it for the terminal.
fn error_chain(e: &dyn std::error::Error) -> String {
    let mut out = e.to_string();
    let mut cause = e.source();
    while let Some(c) = cause {
        out.push_str(": ");
        out.push_str(&c.to_string());
        cause = c.source();
    }
    out
}
