//! `qdchain`: spectra, group delay, dressed modes and gate sweeps for chains
//! of waveguide-coupled cavity-QD subsystems.
//!
//! Exit codes: 0 success, 2 config error, 3 engine/oracle divergence,
//! 4 degenerate sweep.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qdchain::Channel;

use crate::commands::GridFlags;

#[derive(Parser)]
#[command(name = "qdchain", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GridArgs {
    /// Grid start, offset from the reference frequency, in config units.
    #[arg(long, allow_negative_numbers = true)]
    omega_start: Option<f64>,
    /// Grid stop, in config units.
    #[arg(long, allow_negative_numbers = true)]
    omega_stop: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

impl From<GridArgs> for GridFlags {
    fn from(a: GridArgs) -> Self {
        GridFlags {
            start: a.omega_start,
            stop: a.omega_stop,
            points: a.points,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ChannelArg {
    Transmission,
    Reflection,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a config, print it in kappa0 units.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Scattering spectrum to spectrum.csv with a JSON sidecar of features.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Cross-check every sample against the steady-state solver.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Group delay from the unwrapped phase to delay.csv.
    Delay {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value = "transmission")]
        channel: ChannelArg,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Gate fidelity and loss over g/Gamma and detuning scenarios to gate.csv.
    Gate {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated g/Gamma values [default: 0 to 2 step 0.05].
        #[arg(long, value_parser = commands::parse_real_list)]
        g_list: Option<::std::vec::Vec<f64>>,
        /// JSON array of {id, cavity_detunings, qd_detunings} in config units.
        #[arg(long)]
        scenario_list: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Dressed-mode frequencies and predicted peak windows to modes.json.
    Modes {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Compare transfer matrices and steady-state solver on random chains.
    Selfcheck {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        subsystems: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 201)]
        points: usize,
        /// Also write the first random chain as a config document.
        #[arg(long)]
        emit_config: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Validate { config } => commands::validate(&config),
        Command::Spectrum {
            config,
            grid,
            oracle,
            out,
        } => commands::spectrum(&config, &grid.into(), oracle, &out),
        Command::Delay {
            config,
            grid,
            channel,
            out,
        } => {
            let channel = match channel {
                ChannelArg::Transmission => Channel::Transmission,
                ChannelArg::Reflection => Channel::Reflection,
            };
            commands::delay(&config, &grid.into(), channel, &out)
        }
        Command::Gate {
            config,
            g_list,
            scenario_list,
            out,
        } => commands::gate(&config, g_list, scenario_list.as_deref(), &out),
        Command::Modes { config, out } => commands::modes(&config, &out),
        Command::Selfcheck {
            seed,
            subsystems,
            trials,
            points,
            emit_config,
        } => commands::selfcheck(seed, subsystems, trials, points, emit_config.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
