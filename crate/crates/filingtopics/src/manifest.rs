//! `run_manifest.json`: configuration snapshot, input digests, per-stage row
//! counts and timings. Each stage merges its entry into the existing file.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::formats::{read_text, write_text, FormatError};

pub const FILE_NAME: &str = "run_manifest.json";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: Option<Config>,
    /// Input name → SHA-256 hex digest.
    pub inputs: BTreeMap<String, String>,
    pub stages: BTreeMap<String, StageRecord>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub rows: BTreeMap<String, usize>,
    pub millis: u128,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String, FormatError> {
    let bytes = std::fs::read(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(sha256_hex(&bytes))
}

impl RunManifest {
    /// The manifest in `out_dir`, or an empty one when absent or unreadable.
    pub fn load(out_dir: &Path) -> Self {
        read_text(&out_dir.join(FILE_NAME))
            .ok()
            .and_then(|t| serde_json::from_str(&t).ok())
            .unwrap_or_default()
    }

    pub fn record(
        out_dir: &Path,
        config: &Config,
        stage: &str,
        rows: &BTreeMap<String, usize>,
        inputs: BTreeMap<String, String>,
        elapsed: Duration,
    ) -> Result<(), FormatError> {
        let mut manifest = Self::load(out_dir);
        manifest.tool_version = env!("CARGO_PKG_VERSION").to_string();
        manifest.config = Some(config.clone());
        manifest.inputs.extend(inputs);
        manifest.stages.insert(
            stage.to_string(),
            StageRecord {
                rows: rows.clone(),
                millis: elapsed.as_millis(),
            },
        );
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        write_text(&out_dir.join(FILE_NAME), &(json + "\n"))
    }
}
