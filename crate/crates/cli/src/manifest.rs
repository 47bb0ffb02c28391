use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputFile {
    /// File name without directories, so relocating inputs keeps the hash.
    pub name: String,
    pub sha256: String,
}

/// Provenance record written next to every output.
///
/// `hash` covers every field except `timestamp_unix`, so two runs over the
/// same inputs and options share a hash and produce identical outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub inputs: Vec<InputFile>,
    pub quantizations: Vec<String>,
    pub lesion_ids: Vec<String>,
    pub parameters: serde_json::Value,
    pub timestamp_unix: u64,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            tool: "radiomics".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            inputs: Vec::new(),
            quantizations: Vec::new(),
            lesion_ids: Vec::new(),
            parameters: serde_json::Value::Null,
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> CliResult<()> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        self.inputs.push(InputFile {
            name: path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    pub fn hash(&self) -> String {
        let mut content = self.clone();
        content.timestamp_unix = 0;
        sha256_hex(&serde_json::to_vec(&content).expect("manifest serialises"))
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let doc = serde_json::json!({ "hash": self.hash(), "manifest": self });
        let text = serde_json::to_string_pretty(&doc).expect("manifest serialises");
        std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
