mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use iomarkov_core::perturb::DEFAULT_EIGEN_CROSSCHECK_FRACTION;
use iomarkov_core::{Error, ForecastTarget};

use commands::{Outcome, SweepOptions};
use config::{CommonArgs, RunConfig};

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 4;

/// Markov-chain analytics over yearly world input-output tables.
#[derive(Debug, Parser)]
#[command(name = "iomarkov", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TargetArg {
    Gap,
    PiShare,
    GdpShare,
}

impl From<TargetArg> for ForecastTarget {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Gap => ForecastTarget::Gap,
            TargetArg::PiShare => ForecastTarget::PiShare,
            TargetArg::GdpShare => ForecastTarget::GdpShare,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-year closed-system and ergodicity checks (validation.json).
    Validate(CommonArgs),
    /// Mixing time, Kemeny constant and steady states per year.
    Analyze(CommonArgs),
    /// Slow down every node of one year and record systemic measures.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Year to sweep (default: last year in the manifest).
        #[arg(long)]
        year: Option<i32>,
        /// Skip the Kemeny-sensitivity part (one dense inversion per node).
        #[arg(long)]
        skip_kemeny: bool,
        /// Append finished Kemeny experiments here and resume from it.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Share of experiments re-checked with the eigenvalue method.
        #[arg(long, default_value_t = DEFAULT_EIGEN_CROSSCHECK_FRACTION)]
        eigen_check_fraction: f64,
    },
    /// Economy-level steady-state share against GDP share.
    Tracks(CommonArgs),
    /// Trailing-difference projections of each economy's track.
    Forecast {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 5)]
        horizon: usize,
        #[arg(long, value_enum, default_value_t = TargetArg::Gap)]
        target: TargetArg,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => EXIT_IO,
        Error::NoConvergence { .. }
        | Error::NotIrreducible(_)
        | Error::NumericalFailure(_)
        | Error::DanglingAfterPerturbation { .. } => EXIT_NUMERICAL,
        _ => EXIT_VALIDATION,
    }
}

fn init_threads(threads: usize) {
    if threads > 0 {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    match cli.command {
        Command::Validate(args) => {
            init_threads(args.threads);
            commands::validate(&RunConfig::new("validate", &args))
        }
        Command::Analyze(args) => {
            init_threads(args.threads);
            commands::analyze(&RunConfig::new("analyze", &args))
        }
        Command::Sweep {
            common,
            year,
            skip_kemeny,
            checkpoint,
            eigen_check_fraction,
        } => {
            init_threads(common.threads);
            let config = RunConfig::new("sweep", &common)
                .with("year", year)
                .with("skip_kemeny", skip_kemeny)
                .with("eigen_check_fraction", eigen_check_fraction);
            commands::sweep(
                &config,
                &SweepOptions {
                    year,
                    skip_kemeny,
                    checkpoint,
                    eigen_check_fraction,
                },
            )
        }
        Command::Tracks(args) => {
            init_threads(args.threads);
            commands::tracks(&RunConfig::new("tracks", &args))
        }
        Command::Forecast {
            common,
            horizon,
            target,
        } => {
            init_threads(common.threads);
            let target = ForecastTarget::from(target);
            let config = RunConfig::new("forecast", &common)
                .with("horizon", horizon)
                .with("target", target);
            commands::forecast_cmd(&config, target, horizon)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ValidationFailed) => ExitCode::from(EXIT_VALIDATION),
        Ok(Outcome::NumericalFailures) => ExitCode::from(EXIT_NUMERICAL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
