use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use qkr_core::{run_scenario, ExperimentConfig, Scenario};

use crate::config::parse_config;
use crate::output::{write_results, RunManifest};
use crate::CliError;

/// Environment variable giving the default output directory.
pub const OUT_ENV: &str = "QKR_OUT";

#[derive(Debug, Parser)]
#[command(name = "qkr", version, about = "Kicked molecular rotor simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Two-train control experiment at the configured delays.
    Simulate(RunArgs),
    /// Final energy against the delay between the trains.
    ScanDelay(RunArgs),
    /// Degree of control against the localizing period.
    ScanPeriod(RunArgs),
    /// Quantum and classical traces at fixed stochasticity.
    Transition(RunArgs),
    /// Final energy of a single train against its period.
    ResonanceMap(RunArgs),
    /// Classical kicked-rotor ensemble.
    Classical(RunArgs),
}

impl Command {
    pub fn scenario(&self) -> Scenario {
        match self {
            Command::Simulate(_) => Scenario::Simulate,
            Command::ScanDelay(_) => Scenario::ScanDelay,
            Command::ScanPeriod(_) => Scenario::ScanPeriod,
            Command::Transition(_) => Scenario::Transition,
            Command::ResonanceMap(_) => Scenario::ResonanceMap,
            Command::Classical(_) => Scenario::Classical,
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Simulate(a)
            | Command::ScanDelay(a)
            | Command::ScanPeriod(a)
            | Command::Transition(a)
            | Command::ResonanceMap(a)
            | Command::Classical(a) => a,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Configuration file (TOML); defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory [default: $QKR_OUT or ./out].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

impl RunArgs {
    pub fn load_config(&self) -> Result<ExperimentConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => parse_config(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        Ok(config)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub manifest: RunManifest,
}

/// Runs one subcommand on a dedicated worker pool and writes its outputs.
pub fn execute(command: &Command) -> Result<RunSummary, CliError> {
    let args = command.args();
    let config = args.load_config()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .map_err(|e| CliError::Threads(e.to_string()))?;
    let threads = pool.current_num_threads();
    let start = Instant::now();
    let result = pool.install(|| run_scenario(command.scenario(), &config))?;
    let wall = start.elapsed().as_secs_f64();
    let out_dir = args.out_dir();
    let manifest = write_results(&result, &out_dir, wall, threads)?;
    Ok(RunSummary { out_dir, manifest })
}
