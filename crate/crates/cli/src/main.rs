//! Command-line front end for the word-consensus lattice simulator.
//!
//! Exit codes: 0 success, 1 usage/configuration error, 2 runtime error.

mod commands;
mod config;
mod output;
mod parallel;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_init, parse_rounding, ConfigError, ExperimentConfig};
use namegame_core::{InitMode, Rounding};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }

    fn from_usage(e: ConfigError) -> Self {
        CliError::Usage(e.0)
    }

    fn from_runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "namegame",
    version,
    about = "Word-consensus automata on periodic lattices: runs, sweeps, critical scans, census exports"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trajectory; writes trajectory.csv and census.csv
    Run(CommonArgs),
    /// Sweep the (radius, p) grid with replicates; writes sweep.csv
    Sweep(CommonArgs),
    /// Locate the critical p for one radius; writes sweep.csv and critical.txt
    Critical(CommonArgs),
    /// Run one (radius, p) point and export the rank-frequency word census
    Census(CommonArgs),
}

fn init_from_flag(s: &str) -> Result<InitMode, String> {
    parse_init(s).map_err(|e| e.0)
}

fn rounding_from_flag(s: &str) -> Result<Rounding, String> {
    parse_rounding(s).map_err(|e| e.0)
}

#[derive(Args)]
struct CommonArgs {
    /// Config file with flat key=value lines; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Lattice width (vertices)
    #[arg(long)]
    width: Option<u32>,
    /// Lattice height (vertices)
    #[arg(long)]
    height: Option<u32>,
    /// Neighborhood radius r (run/critical/census)
    #[arg(long)]
    radius: Option<u32>,
    /// Memory-loss parameter in [0,1] (run/census)
    #[arg(long)]
    p: Option<f64>,
    /// Step budget as a multiple of the vertex count
    #[arg(long)]
    steps_factor: Option<u64>,
    /// Replicates per grid point (sweep/critical)
    #[arg(long)]
    replicates: Option<u32>,
    /// Master seed; replicate seeds are derived from it
    #[arg(long)]
    seed: Option<u64>,
    /// Initial words: unique | uniform
    #[arg(long, value_parser = init_from_flag)]
    init: Option<InitMode>,
    /// Forgetfulness rounding: floor | round | ceil
    #[arg(long, value_parser = rounding_from_flag)]
    rounding: Option<Rounding>,
    /// Convergence-fraction cutoff for the critical scan, in (0,1)
    #[arg(long)]
    threshold: Option<f64>,
    /// Grid spacing of the critical-zone refinement
    #[arg(long)]
    refine_step: Option<f64>,
    /// Worker threads for sweep/critical runs
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Energy sampling stride for run trajectories (default: one per n steps)
    #[arg(long)]
    sample_stride: Option<u64>,
    /// Comma-separated p grid for sweep/critical (default 0,0.1,...,1)
    #[arg(long)]
    p_values: Option<String>,
    /// Comma-separated radii for sweep (default 1,2,3,4)
    #[arg(long)]
    radii: Option<String>,
    /// Progress reporting stride to stderr (0 = off)
    #[arg(long)]
    progress: Option<u64>,
}

fn resolve(args: &CommonArgs) -> Result<ExperimentConfig, CliError> {
    let mut config = ExperimentConfig::default();

    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
        config
            .apply_file(&text)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    }

    if let Some(v) = args.width {
        config.width = Some(v);
    }
    if let Some(v) = args.height {
        config.height = Some(v);
    }
    if let Some(v) = args.radius {
        config.radius = Some(v);
    }
    if let Some(v) = args.p {
        config.p = Some(v);
    }
    if let Some(v) = args.steps_factor {
        config.steps_factor = v;
    }
    if let Some(v) = args.replicates {
        config.replicates = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.init {
        config.init = v;
    }
    if let Some(v) = args.rounding {
        config.rounding = v;
    }
    if let Some(v) = args.threshold {
        config.threshold = v;
    }
    if let Some(v) = args.refine_step {
        config.refine_step = v;
    }
    if let Some(v) = args.workers {
        config.workers = v;
    }
    if let Some(v) = &args.out {
        config.out = v.clone();
    }
    if let Some(v) = args.sample_stride {
        config.sample_stride = Some(v);
    }
    if let Some(v) = &args.p_values {
        config.p_values = parse_flag_list(v, "--p-values")?;
    }
    if let Some(v) = &args.radii {
        config.radii = parse_flag_list(v, "--radii")?;
    }
    if let Some(v) = args.progress {
        config.progress = v;
    }

    config.validate().map_err(CliError::from_usage)?;
    Ok(config)
}

fn parse_flag_list<T: std::str::FromStr>(value: &str, flag: &str) -> Result<Vec<T>, CliError> {
    value
        .split(',')
        .map(|item| {
            item.trim()
                .parse::<T>()
                .map_err(|_| CliError::usage(format!("{flag}: cannot parse \"{}\"", item.trim())))
        })
        .collect()
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(args) => commands::cmd_run(&resolve(args)?),
        Command::Sweep(args) => commands::cmd_sweep(&resolve(args)?),
        Command::Critical(args) => commands::cmd_critical(&resolve(args)?),
        Command::Census(args) => commands::cmd_census(&resolve(args)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are success paths.
            if e.use_stderr() {
                let _ = e.print();
                return ExitCode::from(1);
            }
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
