use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// One record per run: what went in, what settings were used, how it ended.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    /// Input path to SHA-256 of its bytes.
    pub input_hashes: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub tolerances: Option<serde_json::Value>,
    pub version: String,
    pub wall_time_ms: f64,
    pub outcome: Outcome,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub message: Option<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    #[default]
    Ok,
    DomainFailure,
    UsageError,
    ToleranceFailure,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::DomainFailure => 1,
            Outcome::UsageError => 2,
            Outcome::ToleranceFailure => 3,
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

impl RunManifest {
    pub fn record_input(&mut self, path: &Path, bytes: &[u8]) {
        self.input_hashes
            .insert(path.display().to_string(), sha256_hex(bytes));
    }
}
