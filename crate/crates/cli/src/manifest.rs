use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use mosco_lab::Result;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TIMINGS_FILE: &str = "timings.txt";

/// Record of one run. Wall-clock times live in `timings_file` so that the
/// manifest itself is reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: Value,
    /// SHA-256 of the canonical config and of every input file.
    pub inputs: BTreeMap<String, String>,
    pub effective_seed: u64,
    pub outputs: Vec<String>,
    pub metrics: BTreeMap<String, Value>,
    pub timings_file: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(command: &str, config: Value, seed: u64) -> Self {
        let mut inputs = BTreeMap::new();
        inputs.insert(
            "config".to_string(),
            sha256_hex(serde_json::to_string(&config).unwrap_or_default().as_bytes()),
        );
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            inputs,
            effective_seed: seed,
            outputs: Vec::new(),
            metrics: BTreeMap::new(),
            timings_file: TIMINGS_FILE.to_string(),
        }
    }

    pub fn hash_input(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path)?;
        self.inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(())
    }

    /// Records an output by its path relative to `dir`.
    pub fn add_output(&mut self, dir: &Path, path: &Path) {
        let rel = path.strip_prefix(dir).unwrap_or(path);
        self.outputs.push(rel.display().to_string());
    }

    pub fn write(&mut self, dir: &Path) -> Result<()> {
        self.outputs.push(MANIFEST_FILE.to_string());
        self.outputs.push(TIMINGS_FILE.to_string());
        self.outputs.sort();
        self.outputs.dedup();
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(dir.join(MANIFEST_FILE), text)?;
        Ok(())
    }
}

/// Wall-clock seconds per stage.
pub struct Timings {
    stages: Vec<(String, f64)>,
    last: Instant,
}

impl Timings {
    pub fn start() -> Self {
        Timings {
            stages: Vec::new(),
            last: Instant::now(),
        }
    }

    pub fn stage(&mut self, name: &str) {
        let now = Instant::now();
        self.stages.push((name.to_string(), (now - self.last).as_secs_f64()));
        self.last = now;
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut s = String::new();
        for (name, secs) in &self.stages {
            s.push_str(&format!("{name} {secs:.6}\n"));
        }
        fs::write(dir.join(TIMINGS_FILE), s)?;
        Ok(())
    }
}
