//! Run configuration files (TOML).
//!
//! ```toml
//! molecule = "O2"            # catalog name, or an inline table of constants
//! temperature_K = 25.0
//! seed = 0
//!
//! [basis]
//! j_max = 60
//!
//! [train]
//! n_pre = 3
//! period_pre = 0.237
//! delay = [0.243, 0.264]
//! n_loc = 12
//! period_loc = 0.267
//! strength = 3.8
//!
//! [model]
//! delta_kick = true
//! ```
//!
//! Every key is optional; see [`ExperimentConfig`] for the defaults.

use std::path::Path;

use qkr_core::ExperimentConfig;

use crate::CliError;

/// Parses and validates a configuration file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, CliError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(&text)
}

/// Parses and validates configuration text. Errors carry the dotted key
/// path of the offending entry.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, CliError> {
    let de = toml::Deserializer::parse(text).map_err(|e| CliError::Config {
        key: String::new(),
        message: e.message().to_string(),
    })?;
    let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        CliError::Config {
            key: if key == "." { String::new() } else { key },
            message: e.into_inner().message().to_string(),
        }
    })?;
    config.validate().map_err(|e| match e {
        qkr_core::Error::Config { key, message } => CliError::Config { key, message },
        other => other.into(),
    })?;
    Ok(config)
}

/// The resolved configuration as TOML, suitable for a rerun.
pub fn to_toml(config: &ExperimentConfig) -> Result<String, CliError> {
    toml::to_string(config).map_err(|e| CliError::Config {
        key: String::new(),
        message: format!("cannot serialize configuration: {e}"),
    })
}
