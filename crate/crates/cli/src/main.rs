//! `degeo`: batch experiments for area-constrained degenerate geodesics.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use commands::Outcome;
use degeo_core::{Error, Result};

#[derive(Parser)]
#[command(name = "degeo", version, about = "Area-constrained geodesics of degenerate conformal metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the solver's symmetry-breaking jitter.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print nothing on success.
    #[arg(long, global = true)]
    quiet: bool,
    /// Worker threads for sweeps (default: logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Constrained minimizer between two points: result.json, curve.csv
    Solve { config: PathBuf },
    /// Warm-started sweep over target areas: table.csv
    Sweep { config: PathBuf },
    /// Closed-form homogeneous-well solutions: result.json, curve.csv or table.csv
    Homogeneous { config: PathBuf },
    /// Radial quartic parabolas, vertical segments and costs: figure1.json, path.csv
    Radial { config: PathBuf },
    /// Traveling-wave profile and second-variation spectrum: profile.csv, spectrum.json
    Wave { config: PathBuf },
}

fn output_dir(flag: &Option<PathBuf>, from_config: Option<String>) -> Result<PathBuf> {
    let dir = flag.clone().or(from_config.map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn run(cli: &Cli) -> Result<Outcome> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    match &cli.command {
        Command::Solve { config } => {
            let c: config::SolveConfig = config::load(config)?;
            let out = output_dir(&cli.out, c.output_dir.clone())?;
            commands::solve(c, &out, cli.seed, cli.quiet)
        }
        Command::Sweep { config } => {
            let c: config::SweepConfig = config::load(config)?;
            let out = output_dir(&cli.out, c.output_dir.clone())?;
            commands::sweep(c, &out, cli.seed, cli.quiet)
        }
        Command::Homogeneous { config } => {
            let c: config::HomogeneousConfig = config::load(config)?;
            let out = output_dir(&cli.out, c.output_dir.clone())?;
            commands::homogeneous(c, &out, cli.quiet)
        }
        Command::Radial { config } => {
            let c: config::RadialConfig = config::load(config)?;
            let out = output_dir(&cli.out, c.output_dir.clone())?;
            commands::radial(c, &out, cli.quiet)
        }
        Command::Wave { config } => {
            let c: config::WaveConfig = config::load(config)?;
            let out = output_dir(&cli.out, c.output_dir.clone())?;
            commands::wave(c, &out, cli.seed, cli.quiet)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let default = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DEGEO_LOG", default)).init();
    match run(&cli) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::Flagged) => ExitCode::from(2),
        Err(e @ (Error::NonexistenceSuspected | Error::BubbleDetected { .. })) => {
            eprintln!("degeo: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("degeo: {e}");
            ExitCode::from(1)
        }
    }
}
