//! `vnw`: sample, verify and classify generalized von Neumann-Wigner
//! potentials and their embedded bound states.

mod commands;
mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

const UNITS_NOTE: &str = "All physics flags are in reduced units (2m/ħ² = 1), so the \
bound state sits at E = k² and lengths are in units where V has dimensions of k².";

#[derive(Parser, Debug)]
#[command(name = "vnw", version, about, long_about = UNITS_NOTE)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Significant digits in text output.
    #[arg(long, global = true, default_value_t = 12)]
    pub precision: usize,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct PhysicsArgs {
    /// Wavenumber of the embedded level (E = k²).
    #[arg(long)]
    pub k: f64,
    /// Strength of the modulation; negative values localize the state.
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    /// Decay power of the modulation, 0 <= beta < 3.
    #[arg(long)]
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PathArg {
    Closed,
    Quad,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tabulate V(r) as CSV `r,V`.
    Potential {
        #[command(flatten)]
        physics: PhysicsArgs,
        #[arg(long)]
        rmax: f64,
        /// Rows on (0, rmax]; the origin is added when V is finite there.
        #[arg(long)]
        n: usize,
    },
    /// Tabulate f(r) and χ(r) as CSV `r,f,chi`.
    Wavefunction {
        #[command(flatten)]
        physics: PhysicsArgs,
        /// Amplitude A = f(0).
        #[arg(long = "A", default_value_t = 1.0)]
        norm: f64,
        #[arg(long)]
        rmax: f64,
        /// Rows on (0, rmax], after the origin row.
        #[arg(long)]
        n: usize,
        /// Closed form (beta in [0, 1]) or quadrature; defaults to the closed form where it exists.
        #[arg(long, value_enum)]
        path: Option<PathArg>,
    },
    /// Check the analytic state against the equation it should solve; JSON report.
    Verify {
        #[command(flatten)]
        physics: PhysicsArgs,
        /// Defaults to 60/k.
        #[arg(long)]
        rmax: Option<f64>,
        /// Numerov step; defaults to 1e-3 of a wavelength.
        #[arg(long)]
        h: Option<f64>,
    },
    /// Predicted decay law, optionally confronted with an envelope fit; JSON.
    Classify {
        #[command(flatten)]
        physics: PhysicsArgs,
        #[arg(long)]
        fit: bool,
        /// Fit range end; defaults to 400/k.
        #[arg(long)]
        rmax: Option<f64>,
        /// Samples on [0, rmax]; defaults to 100 per unit of kr.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Classification and envelope fits over a grid of (a, beta); CSV.
    Sweep {
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[arg(long = "a-list", value_delimiter = ',', allow_negative_numbers = true, default_values_t = [-0.5, -1.0, -3.0])]
        a_list: Vec<f64>,
        #[arg(long = "beta-list", value_delimiter = ',', default_values_t = [0.0, 0.25, 0.5, 0.75, 1.0])]
        beta_list: Vec<f64>,
        #[arg(long)]
        rmax: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        /// Worker threads; 0 picks the number of cores.
        #[arg(long, default_value_t = 0)]
        threads: usize,
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
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(commands::Failure::Numeric(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
