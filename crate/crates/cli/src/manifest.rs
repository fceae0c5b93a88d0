use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

/// Record of one command invocation. `config` holds the resolved parameters
/// (including any spec-file contents), which is all a replay needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seeds: BTreeMap<String, u64>,
    pub config: serde_json::Value,
    pub artifacts: Vec<PathBuf>,
    pub started_unix_ms: u64,
    pub finished_unix_ms: Option<u64>,
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

impl RunManifest {
    pub fn start<P: Serialize>(command: &str, params: &P, seeds: &[(&str, u64)]) -> RunManifest {
        RunManifest {
            tool: "dort".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seeds: seeds.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            config: serde_json::to_value(params).expect("parameters serialize"),
            artifacts: Vec::new(),
            started_unix_ms: now_ms(),
            finished_unix_ms: None,
        }
    }

    pub fn finish(&mut self, artifacts: Vec<PathBuf>) {
        self.artifacts = artifacts;
        self.finished_unix_ms = Some(now_ms());
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n").map_err(|e| CliError::Runtime(format!("{}: {}", path.display(), e)))
    }

    pub fn read(path: &Path) -> CliResult<RunManifest> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {}", path.display(), e)))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {}", path.display(), e)))
    }
}
