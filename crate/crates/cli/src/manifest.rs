//! `manifest.json`: what produced a run directory and how to reproduce it.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::{io_error, CliError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    /// SHA-256 of the effective configuration (`config.toml` in the run dir).
    pub config_hash: String,
    pub master_seed: u64,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<FileDigest, CliError> {
    let bytes = fs::read(path).map_err(|e| io_error(path, e))?;
    Ok(FileDigest {
        path: path.to_path_buf(),
        sha256: sha256_hex(&bytes),
    })
}

pub fn config_hash(config: &RunConfig) -> String {
    sha256_hex(config.to_toml().as_bytes())
}

/// Writes `config.toml` and `manifest.json` into `dir`. Output paths are
/// recorded relative to `dir`.
pub fn write_manifest(
    dir: &Path,
    command: &str,
    config: &RunConfig,
    inputs: &[PathBuf],
    outputs: &[PathBuf],
) -> Result<Manifest, CliError> {
    let config_path = dir.join("config.toml");
    let text = config.to_toml();
    fs::write(&config_path, &text).map_err(|e| io_error(&config_path, e))?;
    let mut out = Vec::with_capacity(outputs.len() + 1);
    for path in std::iter::once(&config_path).chain(outputs) {
        let mut d = file_digest(path)?;
        d.path = path.strip_prefix(dir).unwrap_or(path).to_path_buf();
        out.push(d);
    }
    let manifest = Manifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: sha256_hex(text.as_bytes()),
        master_seed: config.seed,
        inputs: inputs.iter().map(|p| file_digest(p)).collect::<Result<_, _>>()?,
        outputs: out,
    };
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    fs::write(&path, json + "\n").map_err(|e| io_error(&path, e))?;
    Ok(manifest)
}
