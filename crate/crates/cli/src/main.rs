//! Command-line front end for the infinite-server queueing toolkit: analytic
//! network evaluation, the repair-model sweep, the simulation oracle, cost
//! screening and failure-log fitting.

mod commands;
mod io;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{GlobalOpts, QueueChoice};
use report::OutputFormat;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags or unusable input files: exit code 2.
    #[error("{0}")]
    Usage(String),
    /// Numeric or coverage failure on valid input: exit code 1.
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "mginf",
    version,
    about = "Busy-period analytics and a Monte Carlo oracle for open networks of infinite-server queues"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format for stdout.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    output: OutputFormat,

    /// Directory for generated CSV files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Horizon in weeks; overrides the scenario file's horizon.
    #[arg(long, global = true)]
    horizon: Option<f64>,

    /// Master seed for everything simulated.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Analytically evaluate a network file as one equivalent queue.
    Analyze {
        /// Network JSON: {"nodes":[{"name","exo_rate","service"}],"routing":[[...]]}.
        network: PathBuf,
    },
    /// Sweep the repair scenario over its transport probabilities and write
    /// the four tables (stdout + CSV files).
    Sweep {
        /// Repair scenario JSON.
        scenario: PathBuf,
    },
    /// Simulate one queue of the repair scenario.
    Simulate {
        /// Repair scenario JSON.
        #[arg(long)]
        scenario: PathBuf,
        /// Which queue to simulate.
        #[arg(long, value_enum)]
        queue: QueueChoice,
        /// Replications.
        #[arg(long, default_value_t = 10_000)]
        reps: u32,
        /// Transport probability; defaults to the scenario's first p.
        #[arg(long)]
        p: Option<f64>,
    },
    /// Analytic vs simulated, side by side with coverage flags. Exit code 1
    /// if any exact or bounds cell is not covered.
    Compare {
        /// Repair scenario JSON.
        scenario: PathBuf,
        /// Replications per queue and p.
        #[arg(long, default_value_t = 10_000)]
        reps: u32,
        /// Transport probabilities (comma separated); defaults to the
        /// scenario's list.
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
    },
    /// Differential transport cost and investment viability.
    Cost {
        /// Transport cost per year at the initial probability.
        #[arg(long)]
        ci: f64,
        /// Initial transport probability.
        #[arg(long)]
        pi: f64,
        /// Probability reduction.
        #[arg(long)]
        dp: f64,
        /// Station investment per year.
        #[arg(long, default_value_t = 0.0)]
        k: f64,
    },
    /// Estimate (lambda, q, p) and Poisson dispersion from a failure log.
    Fit {
        /// CSV log with header timestamp_weeks,site,transported.
        log: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let opts = GlobalOpts {
        output: cli.output,
        out_dir: cli.out_dir,
        horizon: cli.horizon,
        seed: cli.seed,
    };
    match cli.command {
        Command::Analyze { network } => commands::analyze(&network, &opts),
        Command::Sweep { scenario } => commands::sweep(&scenario, &opts),
        Command::Simulate {
            scenario,
            queue,
            reps,
            p,
        } => commands::simulate(&scenario, queue, reps, p, &opts),
        Command::Compare { scenario, reps, p } => commands::compare(&scenario, reps, p, &opts),
        Command::Cost { ci, pi, dp, k } => commands::cost(ci, pi, dp, k, &opts),
        Command::Fit { log } => commands::fit(&log, &opts),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
