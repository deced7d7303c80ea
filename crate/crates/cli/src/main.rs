use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

use commands::CliError;

#[derive(Parser, Debug)]
#[command(name = "crnlc", version, about = "Reaction network analysis, CF-RM transforms and linear conjugacy search")]
pub struct Cli {
    /// Seed for every sampling step (oracles, verification points).
    #[arg(long, global = true, env = "CRNLC_SEED", default_value_t = crnlc::DEFAULT_SEED)]
    pub seed: u64,

    /// Treat interaction parameter rows within this distance as equal when forming CF-subsets.
    #[arg(long, global = true, default_value_t = 0.0)]
    pub param_tol: f64,

    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Network numbers, structural flags, CF-subsets and T matrices.
    Analyze {
        path: PathBuf,
        /// Write the T matrix as CSV (complex factorizable input only).
        #[arg(long)]
        t_csv: Option<PathBuf>,
        /// Write the T-hat matrix as CSV (complex factorizable input only).
        #[arg(long)]
        t_hat_csv: Option<PathBuf>,
    },
    /// CF-subsets of every reactant complex.
    CfSubsets { path: PathBuf },
    /// Rewrite a non-factorizable system into a dynamically equivalent factorizable one.
    Transform {
        path: PathBuf,
        /// Also keep new product complexes away from existing ones.
        #[arg(long)]
        plus: bool,
        /// Output network file; a JSON sidecar is written next to it.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Search for a sparse or dense linearly conjugate realization.
    Conjugate {
        path: PathBuf,
        #[command(flatten)]
        milp: MilpArgs,
        /// Output network file; a JSON sidecar is written next to it.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the optimization model in LP format.
        #[arg(long)]
        lp_export: Option<PathBuf>,
    },
    /// Integrate the mass balance equations and print a CSV trajectory.
    Simulate {
        path: PathBuf,
        /// Initial state, comma separated (default: all ones).
        #[arg(long, value_delimiter = ',')]
        x0: Option<Vec<f64>>,
        #[arg(long, default_value_t = 50.0)]
        t_end: f64,
        /// Relative local error tolerance of the adaptive integrator.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check that two systems are linearly conjugate under the scaling `c`.
    VerifyConjugacy {
        source: PathBuf,
        target: PathBuf,
        /// Conjugacy constants per species, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        c: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Length of the trajectory comparison; 0 skips it.
        #[arg(long, default_value_t = 50.0)]
        t_end: f64,
        #[arg(long, value_delimiter = ',')]
        x0: Option<Vec<f64>>,
        /// Largest residual still accepted.
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
    /// Write the realization program in LP format without solving it.
    ExportLp {
        path: PathBuf,
        #[command(flatten)]
        milp: MilpArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Sparse,
    Dense,
}

#[derive(Args, Debug, Clone)]
pub struct MilpArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Sparse)]
    pub mode: ModeArg,
    /// Smallest nonzero arc weight; conjugacy constants lie in [eps, 1/eps].
    #[arg(long, default_value_t = 0.001)]
    pub eps: f64,
    /// Upper bound on every arc weight.
    #[arg(long, default_value_t = 20.0)]
    pub u: f64,
    #[arg(long)]
    pub weakly_reversible: bool,
    /// Run the CF-RM transform first when the input is not complex factorizable.
    #[arg(long)]
    pub auto_transform: bool,
    /// Use the plus variant for --auto-transform.
    #[arg(long)]
    pub plus: bool,
    /// Add per-complex bounds on the number of outgoing arcs, found by enumeration.
    #[arg(long)]
    pub support_cuts: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Rejected(_) | CliError::Core(crnlc::CrnError::NoRealization) => 2,
                _ => 1,
            })
        }
    }
}
