//! qpcocycle: experiment runner around the core crate. Reads a sectioned
//! key = value config, runs one subcommand, writes CSV/JSON reports plus a
//! manifest with checksums. Exit codes: 0 ok, 2 config, 3 numeric/IO.

mod config;
mod report;
mod runs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::ExperimentConfig;
use runs::RunError;

#[derive(Parser)]
#[command(name = "qpcocycle", version, about = "Quasiperiodic cocycle experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV/JSON reports and the manifest.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Multiply every grid size by this factor (refinement studies).
    #[arg(long, default_value_t = 1)]
    grid_scale: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Finite-orbit Lyapunov exponent of the configured family.
    Lyapunov(RunArgs),
    /// Exponent profile over imaginary phase heights and its slope.
    Accelerate(RunArgs),
    /// Invariant cone certificate of uniform hyperbolicity.
    Certify(RunArgs),
    /// Classify a grid of spectral parameters and estimate the spectrum.
    Scan(RunArgs),
    /// Rotated-family mean-exponent identity for a diagonal matrix.
    Hab(RunArgs),
    /// Mean exponent of the below-one-coupling family vs its closed form.
    Prop1(RunArgs),
    /// Orthogonal polynomial coefficients and density tables.
    Opuc(RunArgs),
    /// Finite operator truncation eigenvalues.
    Truncation(RunArgs),
}

fn dispatch(cmd: &Cmd) -> Result<(), RunError> {
    let (args, run): (&RunArgs, fn(&ExperimentConfig, &std::path::Path, usize) -> Result<(), RunError>) =
        match cmd {
            Cmd::Lyapunov(a) => (a, runs::lyapunov),
            Cmd::Accelerate(a) => (a, runs::accelerate),
            Cmd::Certify(a) => (a, runs::certify),
            Cmd::Scan(a) => (a, runs::scan),
            Cmd::Hab(a) => (a, runs::hab),
            Cmd::Prop1(a) => (a, runs::prop1),
            Cmd::Opuc(a) => (a, runs::opuc),
            Cmd::Truncation(a) => (a, runs::truncation),
        };
    if args.grid_scale == 0 {
        return Err(RunError::Config("--grid-scale must be at least 1".into()));
    }
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        RunError::Config(format!("cannot read config {}: {e}", args.config.display()))
    })?;
    let cfg = ExperimentConfig::parse(&text)?;
    run(&cfg, &args.out, args.grid_scale)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(RunError::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
