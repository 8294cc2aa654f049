//! Run manifests: enough to bit-reproduce any command.

use anyhow::Context;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    /// Effective argument vector after config-file merging.
    pub argv: Vec<String>,
    pub engine_version: String,
    pub outputs: Vec<PathBuf>,
    pub wall_clock_secs: f64,
}

impl RunManifest {
    pub fn new(argv: Vec<String>, outputs: Vec<PathBuf>, wall_clock_secs: f64) -> Self {
        RunManifest {
            argv,
            engine_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs,
            wall_clock_secs,
        }
    }

    pub fn write_next_to(&self, primary: &Path) -> anyhow::Result<PathBuf> {
        let stem = primary.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
        let path = primary.with_file_name(format!("{stem}.manifest.json"));
        std::fs::write(&path, serde_json::to_vec_pretty(self)?)
            .with_context(|| format!("writing manifest {}", path.display()))?;
        Ok(path)
    }

    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }
}
