//! `dgsuper` command-line harness.

mod config;
mod experiment;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Sources;
use experiment::{AppError, RunConfig, SpectrumConfig, RUN_KEYS, SPECTRUM_KEYS};

#[derive(Parser)]
#[command(name = "dgsuper", version, about = "DG superconvergence experiments for periodic linear advection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence tables, error profiles and transient series for a preset.
    Run(RunArgs),
    /// Per-mode symbol eigenvalues with expansion, gap and Pade summaries.
    Spectrum(SpectrumArgs),
    /// List the built-in presets.
    Presets,
}

/// Every value flag overrides the same key from `--config`.
#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file; keys match the long flag names with `_`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// ex1, ex2, ex3, ex4 or custom.
    #[arg(long)]
    preset: Option<String>,
    /// Polynomial degree in [0, 4].
    #[arg(long)]
    k: Option<String>,
    /// Comma-separated, strictly increasing cell counts.
    #[arg(long = "N", value_name = "LIST")]
    n: Option<String>,
    #[arg(long = "t-final")]
    t_final: Option<String>,
    #[arg(long)]
    cfl: Option<String>,
    /// l2, gauss_radau or special(l).
    #[arg(long)]
    init: Option<String>,
    /// upwind, lf or lax_friedrichs, optionally as lf(M).
    #[arg(long)]
    flux: Option<String>,
    /// Lax-Friedrichs dissipation coefficient.
    #[arg(long = "M")]
    m: Option<String>,
    /// Advection speed (custom preset).
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long)]
    rho0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    u0: Option<String>,
    #[arg(long)]
    c: Option<String>,
    /// fehlberg5 or rk4.
    #[arg(long)]
    scheme: Option<String>,
    /// Custom data: sin_power:P, abs_sin_power:P or bump:P.
    #[arg(long)]
    data: Option<String>,
    /// Also write error profiles and transient series (scalar presets).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    profile: Option<String>,
    #[arg(long = "transient-samples")]
    transient_samples: Option<String>,
    /// Output directory (default ./out).
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    flux: Option<String>,
    #[arg(long = "M")]
    m: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    /// Number of modes m = 0..N-1 in the spectrum table (default 128).
    #[arg(long = "N")]
    n: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

fn load(config: &Option<PathBuf>, keys: &[&str]) -> Result<Sources, AppError> {
    Ok(match config {
        Some(path) => Sources::load(path, keys)?,
        None => Sources::default(),
    })
}

fn execute(cli: Cli) -> Result<String, AppError> {
    match cli.command {
        Command::Run(args) => {
            let mut src = load(&args.config, &RUN_KEYS)?;
            for (key, value) in [
                ("preset", args.preset),
                ("k", args.k),
                ("N", args.n),
                ("t_final", args.t_final),
                ("cfl", args.cfl),
                ("init", args.init),
                ("flux", args.flux),
                ("M", args.m),
                ("a", args.a),
                ("rho0", args.rho0),
                ("u0", args.u0),
                ("c", args.c),
                ("scheme", args.scheme),
                ("data", args.data),
                ("profile", args.profile),
                ("transient_samples", args.transient_samples),
                ("out", args.out),
            ] {
                src.set_flag(key, value);
            }
            let cfg = RunConfig::resolve(&src)?;
            experiment::run(&cfg, &experiment::out_dir(&src))
        }
        Command::Spectrum(args) => {
            let mut src = load(&args.config, &SPECTRUM_KEYS)?;
            for (key, value) in
                [("k", args.k), ("flux", args.flux), ("M", args.m), ("a", args.a), ("N", args.n), ("out", args.out)]
            {
                src.set_flag(key, value);
            }
            let cfg = SpectrumConfig::resolve(&src)?;
            experiment::spectrum(&cfg, &experiment::out_dir(&src))
        }
        Command::Presets => Ok(experiment::presets_listing()),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("dgsuper: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
