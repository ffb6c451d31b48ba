//! Command-line front end: configuration parsing, scenario dispatch and
//! result files.

pub mod app;
pub mod config;
pub mod output;

pub use app::{execute, Cli, Command, RunArgs, RunSummary};
pub use config::{parse_config, parse_config_str};
pub use output::{write_results, RunManifest};

/// Exit code for configuration errors.
pub const EXIT_CONFIG: u8 = 1;
/// Exit code for numerical failures and output errors.
pub const EXIT_RUNTIME: u8 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read configuration {path}: {source}")]
    ReadConfig {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration{}: {message}", if key.is_empty() { String::new() } else { format!(" at `{key}`") })]
    Config { key: String, message: String },
    #[error(transparent)]
    Simulation(#[from] qkr_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot start worker pool: {0}")]
    Threads(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ReadConfig { .. } | CliError::Config { .. } => EXIT_CONFIG,
            CliError::Simulation(e) if e.is_config() => EXIT_CONFIG,
            _ => EXIT_RUNTIME,
        }
    }
}
