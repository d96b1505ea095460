//! `wgsqueeze`: design sweeps, fitting, trace simulation and bandwidth
//! estimates for a waveguide squeezed-light source.
//!
//! Exit codes: 0 success, 2 usage or configuration, 3 malformed input file,
//! 4 model or numerical failure, 5 file I/O.

mod commands;
mod config;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Output;
use crate::config::parse_section;
use crate::exit::CliError;

#[derive(Parser)]
#[command(name = "wgsqueeze", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Shared {
    /// TOML config with one table per subcommand.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output CSV (stdout if omitted).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// RNG seed for simulated traces (overrides the config).
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Print a one-line summary of the result.
    #[arg(long)]
    summary: bool,
    /// Override a config key of this subcommand, e.g. `--set pump_mw=200`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Guided modes against waveguide top width.
    Modes(Shared),
    /// Poling period and SH tuning curve.
    Qpm(Shared),
    /// Squeezing and anti-squeezing against pump power.
    Squeeze(Shared),
    /// Fit efficiency and nonlinearity to a measured pump sweep.
    Fit {
        #[command(flatten)]
        shared: Shared,
        /// Sweep CSV: pump_mw,squeezing_db,antisqueezing_db[,sigma_db].
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
    },
    /// Zero-span homodyne trace under LO phase scanning.
    Trace(Shared),
    /// Measured squeezing against sideband frequency.
    Freqsweep(Shared),
    /// Parametric fluorescence spectrum and its half width.
    Spectrum(Shared),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, shared) = match &cli.command {
        Command::Modes(s) => ("modes", s),
        Command::Qpm(s) => ("qpm", s),
        Command::Squeeze(s) => ("squeeze", s),
        Command::Fit { shared, .. } => ("fit", shared),
        Command::Trace(s) => ("trace", s),
        Command::Freqsweep(s) => ("freqsweep", s),
        Command::Spectrum(s) => ("spectrum", s),
    };
    let raw = config::load(shared.config.as_deref(), name, &shared.overrides)?;
    let seed = shared.seed.or(raw.seed).unwrap_or(0);
    let out = Output {
        out: shared.out.clone(),
        summary: shared.summary,
    };
    let section = raw.section;
    match cli.command {
        Command::Modes(_) => commands::modes(parse_section(name, section)?, &out),
        Command::Qpm(_) => commands::qpm(parse_section(name, section)?, &out),
        Command::Squeeze(_) => commands::squeeze(parse_section(name, section)?, &out),
        Command::Fit { input, .. } => commands::fit(parse_section(name, section)?, input, &out),
        Command::Trace(_) => commands::trace(parse_section(name, section)?, seed, &out),
        Command::Freqsweep(_) => commands::freqsweep(parse_section(name, section)?, &out),
        Command::Spectrum(_) => commands::spectrum(parse_section(name, section)?, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(exit::USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
