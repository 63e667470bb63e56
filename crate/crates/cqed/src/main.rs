use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cqed::commands::{self, GlobalOptions, GreensArgs, WignerArgs};
use cqed::output::{json, parse_range};
use cqed::{CliError, Result};
use cqed_core::domain::{EvaluationMode, Polarization};
use cqed_core::outfield::DEFAULT_PEAK_THRESHOLD;

/// Emission of a two-level emitter into a two-mode planar cavity.
#[derive(Debug, Parser)]
#[command(name = "cqed", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Preset name (fig1a, fig1b) or scenario file.
    #[arg(long, global = true, value_name = "NAME|FILE")]
    scenario: Option<String>,
    /// Outgoing-field evaluation.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    /// Time step; must divide t_max.
    #[arg(long, global = true, value_name = "VALUE")]
    dt: Option<f64>,
    /// Frequency window of the spectra.
    #[arg(long = "omega-window", global = true, value_name = "MIN:MAX:N", allow_hyphen_values = true)]
    omega_window: Option<String>,
    /// Suppress diagnostics on stderr.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write the run directory.
    Simulate,
    /// Efficiency ratios and peak shifts of run A relative to run B.
    Compare { run_a: PathBuf, run_b: PathBuf },
    /// Coupling profile, resonances and Green-tensor identity of a stack.
    Greens {
        #[arg(long, value_name = "FILE")]
        stack: PathBuf,
        #[arg(long, value_enum, default_value = "s")]
        pol: PolArg,
        #[arg(long, default_value_t = 0.0)]
        k: f64,
        #[arg(long, value_name = "MIN:MAX:N")]
        scan: String,
    },
    /// Wigner functions of the outgoing one-photon mixtures.
    Wigner {
        /// Run directory to take the efficiencies from.
        #[arg(long, value_name = "DIR")]
        run: Option<PathBuf>,
        #[arg(long)]
        eta_s: Option<f64>,
        #[arg(long)]
        eta_p: Option<f64>,
        /// Square phase-space grid, same range on both axes.
        #[arg(long, value_name = "MIN:MAX:N", allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// Recompute peaks from a run's spectrum.csv.
    Peaks {
        run: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PEAK_THRESHOLD)]
        threshold: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Pole,
    Fullgreen,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolArg {
    S,
    P,
}

fn run(cli: Cli) -> Result<()> {
    let opts = GlobalOptions {
        out: cli.out,
        scenario: cli.scenario,
        mode: cli.mode.map(|m| match m {
            ModeArg::Pole => EvaluationMode::PoleApprox,
            ModeArg::Fullgreen => EvaluationMode::FullGreen,
        }),
        dt: cli.dt,
        omega_window: cli.omega_window.as_deref().map(|w| parse_range(w, "--omega-window")).transpose()?,
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Simulate => {
            commands::simulate(&opts)?;
        }
        Command::Compare { run_a, run_b } => {
            let report = commands::compare(&run_a, &run_b, &opts)?;
            print!("{}", json(&report));
        }
        Command::Greens { stack, pol, k, scan } => {
            let polarization = match pol {
                PolArg::S => Polarization::S,
                PolArg::P => Polarization::P,
            };
            let args = GreensArgs { stack, polarization, k, scan: parse_range(&scan, "--scan")? };
            commands::greens(&args, &opts)?;
        }
        Command::Wigner { run, eta_s, eta_p, grid } => {
            let grid = grid.as_deref().map(|g| parse_range(g, "--grid")).transpose()?;
            commands::wigner(&WignerArgs { run, eta_s, eta_p, grid }, &opts)?;
        }
        Command::Peaks { run, threshold } => {
            let report = commands::peaks(&run, threshold, &opts)?;
            print!("{}", json(&report));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &CliError) -> ExitCode {
    ExitCode::from(e.exit_code() as u8)
}
