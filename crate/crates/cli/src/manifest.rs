//! Run manifests: every output directory gets exactly one, recording the
//! command, the fully resolved configuration, the seed, input digests, and
//! the tool version. Outputs are reproducible from the manifest alone; the
//! timestamp is provenance, not an input.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub schema: u32,
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub input_digests: BTreeMap<String, String>,
    pub timestamp_unix: u64,
}

impl RunManifest {
    pub fn new(command: &str, seed: Option<u64>, config: serde_json::Value) -> Self {
        RunManifest {
            schema: 1,
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config,
            input_digests: BTreeMap::new(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn digest_input(&mut self, path: &Path) -> std::io::Result<()> {
        let bytes = fs::read(path)?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        self.input_digests
            .insert(path.display().to_string(), hex_string(&hasher.finalize()));
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let body = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(dir.join("manifest.json"), body + "\n")
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
