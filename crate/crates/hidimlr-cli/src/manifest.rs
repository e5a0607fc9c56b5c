use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Provenance block attached to every JSON output: the command, resolved
/// configuration, SHA-256 digests of the exact input bytes, tool version,
/// and wall-clock duration.
pub struct RunManifest {
    command: &'static str,
    started: Instant,
    inputs: Vec<(String, String, String)>, // (role, path, digest)
    config: Value,
}

impl RunManifest {
    pub fn new(command: &'static str) -> RunManifest {
        RunManifest {
            command,
            started: Instant::now(),
            inputs: Vec::new(),
            config: Value::Null,
        }
    }

    pub fn add_input(&mut self, role: &str, path: &Path, bytes: &[u8]) {
        let mut hasher = Sha256::new();
        hasher.update(bytes);
        let digest = hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect::<String>();
        self.inputs
            .push((role.to_string(), path.display().to_string(), digest));
    }

    pub fn set_config(&mut self, config: Value) {
        self.config = config;
    }

    pub fn finish(self) -> Value {
        let inputs: Vec<Value> = self
            .inputs
            .iter()
            .map(|(role, path, digest)| {
                json!({ "role": role, "path": path, "sha256": digest })
            })
            .collect();
        json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "config": self.config,
            "inputs": inputs,
            "duration_seconds": self.started.elapsed().as_secs_f64(),
        })
    }
}
