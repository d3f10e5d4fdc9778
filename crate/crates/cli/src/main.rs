use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;

use config::resolve;
use error::CliError;

/// Lagged cross-correlation spectra of two multivariate time series.
#[derive(Parser)]
#[command(name = "asymspec", version)]
struct Cli {
    /// JSON file with option values; flags given on the command line win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bootstrapped complex spectrum of k(τ) and its fit to the null density
    Spectrum(config::SpectrumOpts),
    /// Largest eigenvalue of k(τ) over a range of lags
    Maxeig(config::MaxEigOpts),
    /// Principal-component analysis of both systems and the component spectrum
    Pca(config::PcaOpts),
    /// Spectrum and leading eigenvectors of the joint correlation matrix
    Joint(config::JointOpts),
    /// Check the fitted null density against simulated uncorrelated series
    McValidate(config::McOpts),
    /// Write synthetic price files
    Generate(config::GenerateOpts),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = cli.config.as_deref();
    match cli.command {
        Command::Spectrum(o) => commands::spectrum(resolve(&o, file, "spectrum")?),
        Command::Maxeig(o) => commands::maxeig(resolve(&o, file, "maxeig")?),
        Command::Pca(o) => commands::pca(resolve(&o, file, "pca")?),
        Command::Joint(o) => commands::joint(resolve(&o, file, "joint")?),
        Command::McValidate(o) => commands::mc_validate(resolve(&o, file, "mc-validate")?),
        Command::Generate(o) => commands::generate(resolve(&o, file, "generate")?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = std::env::var("ASYMSPEC_THREADS").ok().and_then(|v| v.parse().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
