//! `manifest.json`, written next to every output: the resolved command
//! line plus the facts needed to check that a replay uses the same model.

use std::path::Path;

use serde_json::{json, Value};

use crate::error::CliError;
use crate::model::ModelSource;

pub const FILE_NAME: &str = "manifest.json";

pub struct RunManifest<'a> {
    /// Arguments after the program name, with every default filled in and
    /// without the output directory.
    pub command: Vec<String>,
    pub model: &'a ModelSource,
    pub kappa: &'a str,
    pub seed: u64,
    pub engine: &'a str,
    pub outputs: Vec<String>,
}

impl RunManifest<'_> {
    pub fn to_json(&self) -> Value {
        let overrides: Vec<Value> = self
            .model
            .overrides
            .iter()
            .map(|(n, v)| json!([n, v]))
            .collect();
        json!({
            "tool": "sccp",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "model": {
                "source": self.model.name,
                "sha256": self.model.sha256(),
            },
            "overrides": overrides,
            "kappa": self.kappa,
            "seed": self.seed,
            "engine": self.engine,
            "outputs": self.outputs,
        })
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(FILE_NAME);
        let mut text = serde_json::to_string_pretty(&self.to_json())
            .map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }
}

/// Recorded command and model hash of a manifest file.
pub struct Recorded {
    pub command: Vec<String>,
    pub sha256: String,
}

pub fn read(path: &Path) -> Result<Recorded, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: not a manifest: {e}", path.display())))?;
    let bad = || CliError::Usage(format!("{}: not a manifest", path.display()));
    let command = v["command"]
        .as_array()
        .ok_or_else(bad)?
        .iter()
        .map(|a| a.as_str().map(str::to_string).ok_or_else(bad))
        .collect::<Result<Vec<_>, _>>()?;
    let sha256 = v["model"]["sha256"].as_str().ok_or_else(bad)?.to_string();
    Ok(Recorded { command, sha256 })
}
