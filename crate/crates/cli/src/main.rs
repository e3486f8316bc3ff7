//! Command line entry point. One subcommand per experiment kind; data goes
//! to the output CSV, progress and summaries to stderr.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure.

use anderson1d_cli::config::{ExperimentConfig, ExperimentKind};
use anderson1d_cli::experiments::{RunError, run_experiment};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "anderson1d",
    about = "Monte Carlo experiments for the 1D Anderson model with decaying random potential",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration file (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Override the master seed from the config.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Override the output path from the config.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Override any config key by dotted path, e.g. model.alpha=0.4.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Normalized log-radius growth over an energy grid.
    Lyapunov(CommonArgs),
    /// Empirical fourth-moment curve against its product bound.
    FourthMoment(CommonArgs),
    /// Eigenfunction amplitude decay fits on finite boxes.
    SpectrumDecay(CommonArgs),
    /// Decaying initial direction from the two-chain ratio.
    Direction(CommonArgs),
    /// Squared eigenfunction correlator decay over disorder.
    Correlator(CommonArgs),
    /// Fractional moments of the boxed Green's function.
    Greens(CommonArgs),
    /// Abel-averaged transport moments and fitted exponents.
    Moments(CommonArgs),
    /// Growth-rate sweep over (alpha, lambda, energy) with classification.
    PhaseSweep(CommonArgs),
    /// Log-expansion decomposition and oscillatory-sum diagnostics.
    Diagnostics(CommonArgs),
}

impl Command {
    fn split(&self) -> (ExperimentKind, &CommonArgs) {
        match self {
            Command::Lyapunov(a) => (ExperimentKind::Lyapunov, a),
            Command::FourthMoment(a) => (ExperimentKind::FourthMoment, a),
            Command::SpectrumDecay(a) => (ExperimentKind::SpectrumDecay, a),
            Command::Direction(a) => (ExperimentKind::Direction, a),
            Command::Correlator(a) => (ExperimentKind::Correlator, a),
            Command::Greens(a) => (ExperimentKind::Greens, a),
            Command::Moments(a) => (ExperimentKind::Moments, a),
            Command::PhaseSweep(a) => (ExperimentKind::PhaseSweep, a),
            Command::Diagnostics(a) => (ExperimentKind::Diagnostics, a),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.split();

    let mut cfg = match ExperimentConfig::load(&args.config, &args.overrides) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    if let Some(threads) = args.threads {
        cfg.threads = threads;
    }

    let start = Instant::now();
    let result = match run_experiment(&cfg, kind) {
        Ok(result) => result,
        Err(RunError::Config(e)) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
        Err(e @ RunError::Numeric(_)) => {
            eprintln!("{e}");
            return ExitCode::from(3);
        }
    };
    if let Err(e) = result.write_csv(&cfg.out) {
        eprintln!("cannot write {}: {e}", cfg.out.display());
        return ExitCode::from(3);
    }
    eprintln!(
        "{kind}: wrote {} rows to {} in {:.2}s (seed {})",
        result.rows.len(),
        cfg.out.display(),
        start.elapsed().as_secs_f64(),
        cfg.seed
    );
    ExitCode::SUCCESS
}
