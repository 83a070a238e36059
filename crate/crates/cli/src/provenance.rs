use serde::Serialize;
use sha2::{Digest, Sha256};

pub const TOOL: &str = "adsched";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Header recorded at the top of every output file.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    /// SHA-256 over everything that determines the output.
    pub config_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(command: &'static str, hashed: &[&[u8]], seed: Option<u64>) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            command,
            config_hash: sha256_hex(hashed),
            seed,
        }
    }

    /// The `{"provenance": ...}` line written before JSONL records.
    pub fn line(&self) -> String {
        let mut s = serde_json::to_string(&serde_json::json!({ "provenance": self }))
            .expect("provenance serializes");
        s.push('\n');
        s
    }
}

/// Hash of several byte strings, each length-prefixed so boundaries count.
pub fn sha256_hex(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())
}
