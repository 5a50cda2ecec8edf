//! `mixfrac`: reproducible experiments for mixed Brownian/fractional SDEs.
//!
//! Exit codes: 0 success, 2 invalid input or failed validation, 3 numerical failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use mixfrac::solver::Scheme;

use config::{ExperimentConfig, Overrides};
use output::Output;

pub const THREADS_ENV: &str = "MIXFRAC_THREADS";

#[derive(Debug)]
pub enum CliError {
    Core(mixfrac::Error),
    Io(String),
    Validation(Vec<String>),
}

impl From<mixfrac::Error> for CliError {
    fn from(e: mixfrac::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Validation(clauses) => write!(f, "assumptions not satisfied:\n  {}", clauses.join("\n  ")),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "mixfrac", version, about = "Experiments for SDEs driven by Brownian and fractional Brownian motion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// TOML experiment file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo path count.
    #[arg(long)]
    paths: Option<usize>,
    /// Time steps.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    hurst: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<Scheme>,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    match s {
        "direct" => Ok(Scheme::Direct),
        "transformed" => Ok(Scheme::Transformed),
        _ => Err(format!("unknown scheme {s:?}, expected direct or transformed")),
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample paths of the solution (paths.csv, simulate.json).
    Simulate(Common),
    /// Strong error against a self-refined reference (convergence.csv/json).
    Convergence(Common),
    /// Itô-formula residuals over a mesh list (ito.csv/json).
    ItoCheck(Common),
    /// Histogram and no-atom diagnostics of X_T (histogram.csv, density.json).
    Density(Common),
    /// Tabulate the drift-regularizing transform (transform.csv/json).
    TransformInspect(Common),
    /// Conditional Gaussian closure checks (moments.csv, rate.csv, gauss.json).
    GaussCheck(Common),
    /// Check the coefficient assumptions (validate.json).
    Validate(Common),
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::Simulate(c) => ("simulate", c),
            Command::Convergence(c) => ("convergence", c),
            Command::ItoCheck(c) => ("ito-check", c),
            Command::Density(c) => ("density", c),
            Command::TransformInspect(c) => ("transform-inspect", c),
            Command::GaussCheck(c) => ("gauss-check", c),
            Command::Validate(c) => ("validate", c),
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .map_err(|_| CliError::Core(mixfrac::Error::Config(format!("{THREADS_ENV} must be an integer, got {value:?}"))))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let (name, common) = cli.command.parts();
    let overrides = Overrides {
        seed: common.seed,
        paths: common.paths,
        steps: common.steps,
        hurst: common.hurst,
        out: common.out.clone(),
        scheme: common.scheme,
    };
    let config = ExperimentConfig::load(common.config.as_deref(), &overrides)?;
    let started = Instant::now();
    let mut out = Output::create(&config.out)?;
    out.json("config.json", &config)?;
    let mut failed = Vec::new();
    match &cli.command {
        Command::Simulate(_) => commands::simulate(&config, &mut out)?,
        Command::Convergence(_) => commands::convergence(&config, &mut out)?,
        Command::ItoCheck(_) => commands::ito(&config, &mut out)?,
        Command::Density(_) => commands::density(&config, &mut out)?,
        Command::TransformInspect(_) => commands::transform(&config, &mut out)?,
        Command::GaussCheck(_) => commands::gauss(&config, &mut out)?,
        Command::Validate(_) => failed = commands::validate(&config, &mut out)?,
    }
    out.finish(name, &config.canonical_json(), config.seed, started.elapsed().as_secs_f64())?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(failed))
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
