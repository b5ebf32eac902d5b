use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dynstiff::identify::ModelKind;

mod commands;
mod config;
mod manifest;

/// Joint dynamic-stiffness identification and amplification-controller design.
#[derive(Debug, Parser)]
#[command(name = "dynstiff", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a chirp-response record for a synthetic subject.
    Simulate(SimulateArgs),
    /// Estimate the FRF of a record and fit the viscous, hysteretic and combined models.
    Identify(IdentifyArgs),
    /// F-test the two-damping-term model against each single-term model.
    Ftest(FtestArgs),
    /// Regress hysteretic damping against stiffness over the parameter table.
    Regress(RegressArgs),
    /// Design a fractional-order amplification controller and export Bode data.
    Design(DesignArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Take protocol and truth from this row of the built-in table (e.g. III.1).
    #[arg(long)]
    exp: Option<String>,
    /// Model used for the truth when --exp is given.
    #[arg(long, default_value = "M2")]
    model: ModelKind,
    #[arg(long)]
    seed: Option<u64>,
    /// Torque noise standard deviation (N·m).
    #[arg(long)]
    noise_torque: Option<f64>,
    /// Angle noise standard deviation (rad).
    #[arg(long)]
    noise_angle: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "m-e")]
    m_e: Option<f64>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct IdentifyArgs {
    /// Time-series CSV with columns t,tau_c,theta_e.
    #[arg(long)]
    record: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use the protocol of this built-in table row.
    #[arg(long)]
    exp: Option<String>,
    /// Experiment label written to the outputs; defaults to --exp.
    #[arg(long)]
    label: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "m-e")]
    m_e: Option<f64>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FtestArgs {
    /// Parameter files written by `identify`.
    #[arg(long, required = true, num_args = 1..)]
    params: Vec<PathBuf>,
    /// Number of frequency samples per experiment.
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// False-rejection probability.
    #[arg(long, default_value_t = 0.05)]
    p: f64,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RegressArgs {
    /// Parameter table JSON; defaults to the built-in table.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlantArgs {
    #[arg(long = "k-h")]
    k_h: Option<f64>,
    #[arg(long = "c-h")]
    c_h: Option<f64>,
    #[arg(long = "m-h")]
    m_h: Option<f64>,
    #[arg(long = "m-e")]
    m_e: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    omega_sea: Option<f64>,
    #[arg(long)]
    zeta_sea: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    plant: PlantArgs,
    /// Target phase margin (deg).
    #[arg(long)]
    phi: f64,
    /// Fractional order; defaults to the midpoint of the admissible interval.
    #[arg(long)]
    f: Option<f64>,
    /// Target crossover (rad/s).
    #[arg(long)]
    omega_c: Option<f64>,
    /// Lag-cascade sections.
    #[arg(long)]
    sections: Option<usize>,
    /// Stiffness sweep LO:HI:N (N·m/rad).
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long, short)]
    out: PathBuf,
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<dynstiff::Error>()) {
        Some(e) if !e.is_validation() => EXIT_NUMERICAL,
        _ => EXIT_VALIDATION,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Identify(a) => commands::identify(a),
        Command::Ftest(a) => commands::ftest(a),
        Command::Regress(a) => commands::regress(a),
        Command::Design(a) => commands::design_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
