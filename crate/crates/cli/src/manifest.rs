use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Written next to the artifacts of every command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the JSON serialization of the effective configuration.
    pub config_hash: String,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub versions: Versions,
    pub inputs: Vec<PathBuf>,
    pub artifacts: Vec<PathBuf>,
    pub created_unix: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Versions {
    pub rtd: String,
    pub manifest_format: u32,
}

pub fn config_hash(config: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(config).expect("JSON values always serialize");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn new(command: &str, config: &impl Serialize, seeds: Vec<u64>) -> Self {
        let config = serde_json::to_value(config).expect("configs serialize to JSON");
        RunManifest {
            command: command.to_string(),
            config_hash: config_hash(&config),
            config,
            seeds,
            versions: Versions {
                rtd: env!("CARGO_PKG_VERSION").to_string(),
                manifest_format: 1,
            },
            inputs: Vec::new(),
            artifacts: Vec::new(),
            created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        }
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }
}

/// `out.csv` -> `out.csv.manifest.json`.
pub fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_depends_only_on_config() {
        let a = RunManifest::new("gen", &serde_json::json!({"n": 3}), vec![1]);
        let b = RunManifest::new("eval", &serde_json::json!({"n": 3}), vec![2]);
        let c = RunManifest::new("gen", &serde_json::json!({"n": 4}), vec![1]);
        assert_eq!(a.config_hash, b.config_hash);
        assert_ne!(a.config_hash, c.config_hash);
        assert_eq!(a.config_hash.len(), 64);
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar(Path::new("a/b.csv")), PathBuf::from("a/b.csv.manifest.json"));
    }
}
