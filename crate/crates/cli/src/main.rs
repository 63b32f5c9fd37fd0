//! `scallop` command-line front end.
//!
//! Exit codes: 0 success (solution verified by simulation), 1 usage or
//! domain error, 2 verification failure.

mod commands;
mod svg;

use std::f64::consts::FRAC_PI_6;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "scallop", version, about = "Optimal strokes for a scallop swimmer switching between fluid regimes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Minimum-time cycle, optionally with its continuous approximation
    MinTime(SolveArgs),
    /// Linear-quadratic cycle minimising int (A u^2 + B theta^2)
    Lq(SolveArgs),
    /// Split a displacement into n = 1..n_max cycles and tabulate the cost
    Sweep(SweepArgs),
    /// Simulate a stored control profile
    Simulate(SimulateArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Swimmer parameters as a `key = value` file (a, b, xi, eta, m, m11, m22)
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Override one swimmer parameter, e.g. `--param eta=3`
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub param_overrides: Vec<String>,
    /// Initial (and final) opening angle
    #[arg(long, default_value_t = FRAC_PI_6, allow_negative_numbers = true)]
    pub theta0: f64,
    /// Relay threshold, also the bound on |u|
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// RK4 step used for the verification run
    #[arg(long, default_value_t = scallop_core::simulator::DEFAULT_STEP)]
    pub h: f64,
    /// Absolute tolerance on the simulated displacement
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Read angles in degrees instead of radians
    #[arg(long)]
    pub degrees: bool,
    /// Output directory (created if missing)
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Artifact kinds to write
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Format::Csv, Format::Json, Format::Svg])]
    pub format: Vec<Format>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Args, Debug, Clone)]
#[command(group = clap::ArgGroup::new("target").required(true).args(["theta1", "dx"]))]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// Switching angle reached at the end of the first leg
    #[arg(long, allow_negative_numbers = true)]
    pub theta1: Option<f64>,
    /// Requested displacement; the switching angle is found by inversion
    #[arg(long, allow_negative_numbers = true)]
    pub dx: Option<f64>,
    /// Endpoint control value of the continuous approximation
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub u0: f64,
    /// Ramp steepness of the continuous approximation (ramps last 1/k)
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long = "A", default_value_t = 1.0)]
    pub a: f64,
    #[arg(long = "B", default_value_t = 0.0)]
    pub b: f64,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// Total displacement split into n equal cycles
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub dx: f64,
    #[arg(long, default_value_t = 30)]
    pub n_max: u32,
    #[arg(long = "A", default_value_t = 1.0)]
    pub a: f64,
    #[arg(long = "B", default_value_t = 0.0)]
    pub b: f64,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Control profile in JSON, as written by `min-time` or `lq`
    #[arg(long)]
    pub profile: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x0: f64,
    /// Initial fluid regime (1 viscous, 2 ideal)
    #[arg(long, default_value_t = 2)]
    pub w0: u8,
    /// Expected displacement; when given, a mismatch exits with status 2
    #[arg(long, allow_negative_numbers = true)]
    pub dx: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::MinTime(a) => commands::run_min_time(a),
        Command::Lq(a) => commands::run_lq(a),
        Command::Sweep(a) => commands::run_sweep(a),
        Command::Simulate(a) => commands::run_simulate(a),
    };
    match result {
        Ok(commands::Outcome::Verified) => ExitCode::SUCCESS,
        Ok(commands::Outcome::VerificationFailed(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
