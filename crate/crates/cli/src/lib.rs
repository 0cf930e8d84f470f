//! Command-line front end: scenario files, runs, verification reports,
//! ray probes and SVG plots.

pub mod commands;
pub mod config;
pub mod plot;
pub mod trajectory;

use thiserror::Error;

pub use commands::{cmd_probe, cmd_run, cmd_verify, ProbeArgs, ProbeModel, VerifyOutput};
pub use config::{parse_config, Config};
pub use plot::cmd_plot;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("convexity loss: {0}")]
    Convexity(String),
}

impl CliError {
    /// 1 usage, 2 numerical failure, 3 convexity loss.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Convexity(_) => 3,
        }
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: &std::path::Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}
