use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Everything needed to reproduce a run byte for byte: the argv, the seed,
/// the resolved parameters, and the constants the run derived. Timings are
/// informational only and are excluded from all artifacts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub seed: u64,
    pub parameters: serde_json::Value,
    pub versions: BTreeMap<String, String>,
    pub derived: serde_json::Value,
    pub timings_ms: BTreeMap<String, u128>,
}

impl RunManifest {
    pub fn new(command: Vec<String>, seed: u64) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert("lattice-cover".into(), env!("CARGO_PKG_VERSION").into());
        Self {
            command,
            seed,
            parameters: serde_json::Value::Null,
            versions,
            derived: serde_json::Value::Null,
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self).expect("manifest serializes"))
    }

    pub fn load(path: &Path) -> Result<Self, lattice_cover::Error> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}
