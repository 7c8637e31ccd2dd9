//! Command-line front end.
//!
//! Each subcommand reads a TOML configuration, runs one sweep and writes
//! its CSV tables plus a `manifest.json` into the output directory.
//!
//! Exit status: 0 on success, 1 when `validate` finds a failing criterion,
//! 2 for a configuration or usage error (nothing is written), 3 for a
//! runtime error.

pub mod config;
pub mod tables;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::montecarlo::with_workers;
use crate::validation::{self, Settings};
use crate::{Error, Result};

pub use config::Config;
pub use tables::Table;

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "isgraph", version, about = "Secrecy graph experiments on Poisson networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML configuration file; defaults apply to anything it omits.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Master seed, overriding the config.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    /// Trials for the chosen subcommand, overriding the config.
    #[arg(long, global = true, value_name = "N")]
    pub trials: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,

    /// Worker threads. Changes speed only, never results.
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,

    /// Override a config key, e.g. `--set degrees.lambda_e=0.2`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// In- and out-degree distribution under one edge rule.
    Degrees,
    /// In- and out-isolation probabilities over a density-ratio grid.
    Isolation,
    /// Secrecy outage of the link to the i-th nearest neighbour.
    Msr,
    /// Mean degree under a rate threshold, sectorization and neutralization.
    Enhance,
    /// Mean degree with colluding eavesdroppers over a path-loss grid.
    Collude,
    /// Boundary-reaching probability of the probe's components.
    Percolation,
    /// Full out- and in-connectivity of a probe to a square region.
    Fullconn,
    /// Monte Carlo versus closed-form acceptance suite.
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Degrees => "degrees",
            Command::Isolation => "isolation",
            Command::Msr => "msr",
            Command::Enhance => "enhance",
            Command::Collude => "collude",
            Command::Percolation => "percolation",
            Command::Fullconn => "fullconn",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config_digest: String,
    pub master_seed: u64,
    pub tool_version: String,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<String>,
}

/// Resolve the configuration: file, then `--set`, then `--seed`/`--trials`.
pub fn resolve_config(cli: &Cli) -> Result<Config> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut overrides = cli.overrides.clone();
    if let Some(seed) = cli.seed {
        overrides.push(format!("seed={seed}"));
    }
    if let Some(n) = cli.trials {
        if cli.command == Command::Validate {
            return Err(Error::Config("validate takes no --trials; use --set validate.scale=X".into()));
        }
        overrides.push(format!("{}.trials={n}", cli.command.name()));
    }
    if cli.workers == Some(0) {
        return Err(Error::Config("--workers must be >= 1".into()));
    }
    config::parse(&text, &overrides)
}

/// Tables for a data subcommand.
pub fn run_tables(command: Command, cfg: &Config) -> Result<Vec<Table>> {
    match command {
        Command::Degrees => tables::degrees(cfg),
        Command::Isolation => tables::isolation(cfg),
        Command::Msr => tables::msr(cfg),
        Command::Enhance => tables::enhance(cfg),
        Command::Collude => tables::collude(cfg),
        Command::Percolation => tables::percolation(cfg),
        Command::Fullconn => tables::fullconn(cfg),
        Command::Validate => {
            let results = validation::run_all(&Settings::from_config(cfg), |r| println!("{}", r.line()))?;
            Ok(vec![validation::table(&results)])
        }
    }
}

fn write_outputs(dir: &Path, files: &[(String, Vec<u8>)], manifest: &RunManifest) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, bytes) in files {
        std::fs::write(dir.join(name), bytes)?;
    }
    let json = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    std::fs::write(dir.join("manifest.json"), json)?;
    Ok(())
}

/// Run a parsed command line and return the process exit status.
pub fn run(cli: &Cli) -> i32 {
    let cfg = match resolve_config(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let digest = cfg.digest();
    let start = Instant::now();
    let tables = match with_workers(cli.workers, || run_tables(cli.command, &cfg)).and_then(|r| r) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
    };
    let files: Result<Vec<(String, Vec<u8>)>> =
        tables.iter().map(|t| Ok((t.name.clone(), t.to_csv(&digest)?))).collect();
    let files = match files {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
    };
    let manifest = RunManifest {
        subcommand: cli.command.name().to_string(),
        config_digest: digest,
        master_seed: cfg.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        outputs: files.iter().map(|f| f.0.clone()).collect(),
    };
    if let Err(e) = write_outputs(&cli.out, &files, &manifest) {
        eprintln!("error: {e}");
        return EXIT_RUNTIME;
    }
    for (name, _) in &files {
        println!("wrote {}", cli.out.join(name).display());
    }
    if cli.command == Command::Validate && !validation::table_passes(&tables[0]) {
        return EXIT_VALIDATION;
    }
    0
}

/// Parse `args` (including the program name) and run.
pub fn main_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_CONFIG
            } else {
                0
            }
        }
    }
}
