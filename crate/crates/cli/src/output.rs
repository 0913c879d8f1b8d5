//! Atomic file output and run metadata sidecars.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

/// Writes `bytes` to a temporary file next to `path`, then renames it over
/// `path`, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)
        .with_context(|| format!("writing {}", path.display()))?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// `<path>.meta.json`, trailing separators stripped.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let s = path.as_os_str().to_string_lossy();
    let trimmed = s.trim_end_matches(['/', '\\']);
    let base = if trimmed.is_empty() { s.as_ref() } else { trimmed };
    PathBuf::from(format!("{base}.meta.json"))
}

#[derive(Debug, Serialize)]
pub struct RunMeta {
    pub command: String,
    pub version: &'static str,
    pub seed: Option<u64>,
    pub params: serde_json::Value,
    pub argv: Vec<String>,
    pub outputs: Vec<PathBuf>,
    pub wall_time_s: f64,
}

/// Collects what a run did so the sidecar can replay it.
pub struct Run {
    command: String,
    started: Instant,
    pub seed: Option<u64>,
    pub params: serde_json::Value,
    pub outputs: Vec<PathBuf>,
}

impl Run {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            started: Instant::now(),
            seed: None,
            params: serde_json::Value::Null,
            outputs: Vec::new(),
        }
    }

    pub fn params(&mut self, p: impl Serialize) -> Result<()> {
        self.params = serde_json::to_value(p)?;
        Ok(())
    }

    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        write_atomic(path, bytes)?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    pub fn finish(self, sidecar: &Path) -> Result<()> {
        let meta = RunMeta {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            seed: self.seed,
            params: self.params,
            argv: std::env::args().collect(),
            outputs: self.outputs,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        let mut bytes = serde_json::to_vec_pretty(&meta)?;
        bytes.push(b'\n');
        write_atomic(sidecar, &bytes)
    }
}
