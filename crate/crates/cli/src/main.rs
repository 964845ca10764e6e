use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use starlocal::scenario::ScenarioKind;
use starlocal::tensor::set_max_joint_dim;

mod commands;
mod table;
mod verify;

use table::Table;

/// Environment variable overriding the Hilbert-space dimension guard.
const MAX_DIM_ENV: &str = "STARLOCAL_MAX_DIM";

#[derive(Parser)]
#[command(name = "starlocal")]
#[command(about = "Nonlinear n-locality inequalities for star networks: sweeps and checks")]
#[command(version)]
struct Cli {
    /// Number of edge parties
    #[arg(long, global = true, default_value_t = 3)]
    n: usize,

    /// Points per sweep
    #[arg(long, global = true, default_value_t = 101)]
    grid: usize,

    /// Seed for randomized checks
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Ratio I = alpha J imposed by the sdp command
    #[arg(long, global = true, default_value_t = 1.0)]
    alpha: f64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SdpScenario {
    TwoToTwo,
    SingleMeasurement,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check and report pass/fail per criterion
    Verify,
    /// Boundaries of the n-local, local and quantum sets in the (I, J) plane
    Region,
    /// Werner-noise sweep and visibility threshold
    Noise,
    /// Detector-efficiency sweep and threshold for the two-setting scenario
    Efficiency,
    /// Generalized Bell-state measurement scenario with Alice inefficiency
    Ghz,
    /// Optimize Bob's measurement on the slice I = alpha J
    Sdp {
        #[arg(long, value_enum, default_value_t = SdpScenario::TwoToTwo)]
        scenario: SdpScenario,
    },
}

fn run(cli: &Cli) -> starlocal::Result<Table> {
    match &cli.command {
        Command::Verify => verify::run(cli.seed),
        Command::Region => commands::region(cli.n, cli.grid),
        Command::Noise => commands::noise(cli.n, cli.grid),
        Command::Efficiency => commands::efficiency(cli.n, cli.grid),
        Command::Ghz => commands::ghz(cli.n, cli.grid),
        Command::Sdp { scenario } => {
            let kind = match scenario {
                SdpScenario::TwoToTwo => ScenarioKind::TwoToTwo,
                SdpScenario::SingleMeasurement => ScenarioKind::SingleMeasurement,
            };
            commands::sdp(cli.n, cli.alpha, kind)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(raw) = std::env::var(MAX_DIM_ENV) {
        match raw.parse::<usize>() {
            Ok(dim) if dim > 0 => set_max_joint_dim(dim),
            _ => {
                eprintln!("error: {MAX_DIM_ENV} must be a positive integer, got {raw:?}");
                return ExitCode::from(2);
            }
        }
    }
    let table = match run(&cli) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    for c in &table.checks {
        eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let rendered = match cli.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, rendered) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{rendered}"),
    }
    if table.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
