//! Atomic output files and the run manifest that lists them.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use crate::error::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
}

/// Side-car manifest. Every file in `outputs` lives next to it and is
/// identified by name and content hash.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub seeds: Vec<u64>,
    pub tool_version: String,
    pub rng_algorithm: String,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<OutputRecord>,
}

/// Collects outputs for one command run in a single directory.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<OutputRecord>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Input(format!("creating {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    /// Writes `bytes` to a temporary file in the output directory and renames
    /// it into place, so readers never see a partial file.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        persist(&self.dir, name, bytes)?;
        self.written.push(OutputRecord { file: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    /// Renders a CSV through `render` and writes it.
    pub fn write_csv<F>(&mut self, name: &str, render: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<(), csv::Error>,
    {
        let mut buf = Vec::new();
        render(&mut buf).map_err(|e| CliError::Input(format!("rendering {name}: {e}")))?;
        self.write(name, &buf)
    }

    pub fn finish(self, mut manifest: RunManifest) -> Result<PathBuf, CliError> {
        manifest.outputs = self.written;
        manifest.finished_at = now();
        let mut json = serde_json::to_vec_pretty(&manifest)
            .map_err(|e| CliError::Input(format!("serializing manifest: {e}")))?;
        json.push(b'\n');
        persist(&self.dir, MANIFEST_NAME, &json)?;
        Ok(self.dir.join(MANIFEST_NAME))
    }
}

fn persist(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    let target = dir.join(name);
    let fail = |e: std::io::Error| CliError::Input(format!("writing {}: {e}", target.display()));
    let mut tmp = NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(&target).map_err(|e| fail(e.error))?;
    Ok(())
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}
