//! Experiment commands behind the `dort` binary. Each command takes a fully
//! resolved parameter struct, writes a [`RunManifest`] before its outputs and
//! can be replayed from that manifest.

use std::path::Path;

pub mod commands;
pub mod manifest;

pub use commands::{
    eval, generate, replay, run, train, Command, EvalParams, GenerateParams, RunParams, TrainParams,
};
pub use manifest::RunManifest;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("training: {0}")]
    Training(String),
    #[error("{0}")]
    Runtime(String),
    #[error("evaluation input: {0}")]
    EvalInput(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Training(_) => 3,
            CliError::Runtime(_) => 4,
            CliError::EvalInput(_) => 5,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Worker count for per-sequence work: `DORT_THREADS` when set, otherwise
/// the available parallelism.
pub fn worker_count() -> usize {
    match std::env::var("DORT_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()) {
        Some(n) => n.max(1),
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    }
}

/// Reads a TOML file into `T`; any failure is a usage error.
pub fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {}", path.display(), e)))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {}", path.display(), e)))
}
