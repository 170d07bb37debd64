use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use serde::Serialize;

/// Sidecar written next to every output file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub base_seed: Option<u64>,
    pub version: String,
    pub threads: Option<usize>,
    pub wall_clock_secs: f64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: impl Serialize, base_seed: Option<u64>) -> Result<Self> {
        Ok(Self {
            command: command.to_owned(),
            config: serde_json::to_value(config).context("serializing config echo")?,
            base_seed,
            version: version_string(),
            threads: None,
            wall_clock_secs: 0.0,
            outputs: Vec::new(),
        })
    }

    pub fn finish(mut self, elapsed: Duration, output: &Path) -> Result<PathBuf> {
        self.wall_clock_secs = elapsed.as_secs_f64();
        self.outputs.push(output.display().to_string());
        let path = manifest_path(output);
        let json = serde_json::to_string_pretty(&self)?;
        fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

pub fn version_string() -> String {
    format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}

/// `out.csv` -> `out.csv.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}
