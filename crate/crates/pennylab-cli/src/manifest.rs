//! The run manifest: what was configured, what was written, and how long it
//! took. One `manifest.json` per invocation, written after all other
//! outputs so a manifest on disk implies its listed files exist.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::CliError;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: &'static str,
    pub subcommand: String,
    /// Canonical config echo, including defaulted keys.
    pub config: String,
    /// SHA-256 of the semantic config fields.
    pub config_hash: String,
    pub duration_seconds: f64,
    /// File names relative to the output directory, this manifest excluded.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(
        subcommand: &str,
        config: &ExperimentConfig,
        started: Instant,
        outputs: Vec<String>,
    ) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            config: config.canonical(),
            config_hash: config.hash(),
            duration_seconds: started.elapsed().as_secs_f64(),
            outputs,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        // Nothing in `outputs` may be a dangling promise.
        for name in &self.outputs {
            let path = dir.join(name);
            if !path.is_file() {
                return Err(CliError::Runtime(format!(
                    "internal error: manifest lists {} but it was not written",
                    path.display()
                )));
            }
        }
        let path = dir.join("manifest.json");
        let body = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Runtime(format!("manifest serialization: {e}")))?;
        std::fs::write(&path, body + "\n")
            .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))
    }
}
