use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::sha256_hex;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Path relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config_digest: String,
    pub master_seed: u64,
    /// Outputs of every completed stage, keyed by stage name.
    pub stages: BTreeMap<String, Vec<ManifestEntry>>,
}

impl RunManifest {
    pub fn new(config_digest: String, master_seed: u64) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_digest,
            master_seed,
            stages: BTreeMap::new(),
        }
    }

    /// Loads the manifest in `dir`, or starts a fresh one when there is none
    /// or it belongs to a different configuration.
    pub fn open(dir: &Path, config_digest: &str, master_seed: u64) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        if path.exists() {
            let m: RunManifest = serde_json::from_slice(&std::fs::read(&path)?)
                .map_err(|e| Error::format(e.column() as u64, format!("{}: {e}", path.display())))?;
            if m.config_digest == config_digest && m.master_seed == master_seed {
                return Ok(m);
            }
        }
        Ok(RunManifest::new(config_digest.to_string(), master_seed))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(dir.join(MANIFEST_FILE), text + "\n")?;
        Ok(())
    }

    /// Re-hashes every listed file; returns the paths whose content changed
    /// or disappeared.
    pub fn verify(&self, dir: &Path) -> Vec<String> {
        self.stages
            .values()
            .flatten()
            .filter(|e| match std::fs::read(dir.join(&e.path)) {
                Ok(bytes) => sha256_hex(&bytes) != e.sha256,
                Err(_) => true,
            })
            .map(|e| e.path.clone())
            .collect()
    }
}
