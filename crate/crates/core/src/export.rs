//! Versioned export envelopes and the reproducibility ledger embedded in them.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

pub const SERIES_SCHEMA: &str = "actionlens.series/v1";
pub const CLUSTERS_SCHEMA: &str = "actionlens.clusters/v1";
pub const SHIFT_SCHEMA: &str = "actionlens.shift/v1";
pub const COUNTIES_SCHEMA: &str = "actionlens.counties/v1";
pub const EVAL_SCHEMA: &str = "actionlens.eval/v1";
pub const CLASSIFY_META_SCHEMA: &str = "actionlens.classify-meta/v1";
pub const WINDOWS_SCHEMA: &str = "actionlens.windows/v1";

/// Command, parameters and input digests behind an export. Paths are
/// deliberately left out so identical inputs give identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub command: String,
    pub config: serde_json::Value,
    /// Input role -> sha256 hex digest.
    pub inputs: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Provenance {
            tool: format!("actionlens {}", env!("CARGO_PKG_VERSION")),
            command: command.to_string(),
            config,
            inputs: BTreeMap::new(),
        }
    }

    pub fn with_input(mut self, role: &str, path: &Path) -> Result<Self> {
        self.inputs.insert(role.to_string(), sha256_file(path)?);
        Ok(self)
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("provenance serializes")
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = f.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::json("export", e))?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Checks the `schema` tag of a loaded export.
pub fn expect_schema(value: &serde_json::Value, expected: &str) -> Result<()> {
    match value.get("schema").and_then(|s| s.as_str()) {
        Some(s) if s == expected => Ok(()),
        other => Err(Error::SchemaMismatch {
            expected: expected.into(),
            found: other.unwrap_or("<none>").into(),
        }),
    }
}
