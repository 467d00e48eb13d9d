use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Written as `manifest.json` in every output directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub tool_version: String,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Failure {
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
}

/// SHA-256 of the config re-serialised through `serde_json::Value`, whose
/// maps are key-sorted, so field order and whitespace do not matter.
pub fn config_digest<T: Serialize>(config: &T) -> String {
    let value = serde_json::to_value(config).expect("config serialises");
    let canonical = serde_json::to_string(&value).expect("value serialises");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn start<T: Serialize>(command: &str, config: &T) -> Self {
        let started = now();
        Self {
            command: command.to_string(),
            config_digest: config_digest(config),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            finished: started.clone(),
            started,
            outputs: Vec::new(),
            failure: None,
        }
    }

    pub fn finish(mut self, dir: &Path) -> anyhow::Result<()> {
        self.finished = now();
        self.outputs.push("manifest.json".into());
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&self)?;
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_ignores_key_order_and_whitespace() {
        let a: serde_json::Value = serde_json::from_str(r#"{"b": 1, "a": [1, 2]}"#).unwrap();
        let b: serde_json::Value = serde_json::from_str("{\"a\":[1,2],\n \"b\":1}").unwrap();
        assert_eq!(config_digest(&a), config_digest(&b));
        assert_eq!(config_digest(&a).len(), 64);
        let c: serde_json::Value = serde_json::from_str(r#"{"a": [2, 1], "b": 1}"#).unwrap();
        assert_ne!(config_digest(&a), config_digest(&c));
    }
}
