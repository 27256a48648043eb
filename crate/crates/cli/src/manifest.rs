use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};
use sotifkit::kitti_io::write_atomic;

/// Written next to the outputs of every command that creates files. Kept
/// out of the dataset tree hash since it carries wall-clock timestamps.
pub const RUN_MANIFEST_FILE: &str = "run_manifest.json";

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub tool_version: String,
    /// SHA-256 of the effective configuration serialized as JSON.
    pub config_digest: String,
    pub seed: Option<u64>,
    pub started_at: String,
    pub finished_at: String,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

pub fn config_digest<T: Serialize>(config: &T) -> String {
    let json = serde_json::to_vec(config).expect("configs serialize");
    hex::encode(Sha256::digest(json))
}

pub fn timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn new<T: Serialize>(command: &str, config: &T, started: DateTime<Utc>) -> Self {
        Self {
            command: command.to_string(),
            args: std::env::args().skip(1).collect(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_digest: config_digest(config),
            seed: None,
            started_at: timestamp(started),
            finished_at: String::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn write(mut self, dir: &Path) -> anyhow::Result<()> {
        self.finished_at = timestamp(Utc::now());
        let json = serde_json::to_string_pretty(&self)?;
        write_atomic(&dir.join(RUN_MANIFEST_FILE), json.as_bytes())?;
        Ok(())
    }
}
