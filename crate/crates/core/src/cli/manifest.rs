use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::io::{read_file, to_json_pretty, write_file};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance record written next to every command's outputs. It holds no
/// timestamps or absolute output paths, so identical runs write identical
/// manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub parameters: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub seed: Option<u64>,
    /// File names relative to the output directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, parameters: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            parameters,
            inputs: Vec::new(),
            seed,
            outputs: Vec::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let bytes = read_file(path)?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes.as_bytes()),
        });
        Ok(())
    }

    /// Writes `contents` to `dir/name` and records it.
    pub fn emit(&mut self, dir: &Path, name: &str, contents: &str) -> Result<()> {
        write_file(&dir.join(name), contents.as_bytes())?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn finish(mut self, dir: &Path) -> Result<Self> {
        self.outputs.push(MANIFEST_FILE.to_string());
        write_file(&dir.join(MANIFEST_FILE), to_json_pretty(&self)?.as_bytes())?;
        Ok(self)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
