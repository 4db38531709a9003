//! Run manifests: resolved configuration, tool version, seed and output digests.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::AppResult;
use crate::formats::write_text;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub master_seed: Option<u64>,
    pub config: serde_json::Value,
    /// Command-specific results worth keeping next to the outputs.
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
    /// Output file name to hex SHA-256 of its contents.
    pub outputs: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(command: impl Into<String>, master_seed: Option<u64>, config: serde_json::Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            master_seed,
            config,
            details: serde_json::Value::Null,
            outputs: BTreeMap::new(),
        }
    }

    /// Records the digest of `contents` under the file name of `path`.
    pub fn record_output(&mut self, path: &Path, contents: &[u8]) {
        let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
        self.outputs.insert(name, sha256_hex(contents));
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> AppResult<()> {
        write_text(path, &self.to_json())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `text` to `path` and records it in `manifest`.
pub fn emit(manifest: &mut Manifest, path: &Path, text: &str) -> AppResult<()> {
    write_text(path, text)?;
    manifest.record_output(path, text.as_bytes());
    Ok(())
}

/// `<path>.manifest.json`.
pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    s.into()
}
