//! Run configuration and its provenance hash.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const TOOL: &str = "harper";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// The parameters that determine an artifact's content.
///
/// Worker counts, output paths and checkpoint controls are deliberately left
/// out: they must not change the bytes written.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub params: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        Self { command: command.to_string(), params: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.params.insert(key.to_string(), value.to_string());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("string map serializes")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// `# harper <version> config=<hash>`
    pub fn comment_line(&self) -> String {
        format!("# {TOOL} {VERSION} config={}", self.hash())
    }

    pub fn provenance(&self) -> serde_json::Value {
        serde_json::json!({
            "tool": TOOL,
            "version": VERSION,
            "config_hash": self.hash(),
            "config": self,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_insertion_order() {
        let a = RunConfig::new("gaps").with("beta", 0.5).with("alpha", "1/3");
        let b = RunConfig::new("gaps").with("alpha", "1/3").with("beta", 0.5);
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        assert_ne!(a.hash(), RunConfig::new("gaps").with("beta", 0.6).with("alpha", "1/3").hash());
    }
}
