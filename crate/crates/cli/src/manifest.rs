use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Everything needed to reproduce a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: Value,
    /// SHA-256 of every input file, keyed by the path as given.
    pub inputs: BTreeMap<String, String>,
    pub version: String,
    pub seed: Option<u64>,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: Value, seed: Option<u64>) -> Self {
        Self {
            subcommand: subcommand.to_owned(),
            config,
            inputs: BTreeMap::new(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            seed,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    /// Reads an input file and records its digest.
    pub fn read_input(&mut self, path: &Path) -> Result<String> {
        let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        self.inputs
            .insert(path.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8 text", path.display()))
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("manifest serialises")
    }

    /// `doc` with a `manifest` key added.
    pub fn embed(&self, doc: Value) -> Value {
        let mut out = serde_json::Map::new();
        out.insert("manifest".into(), self.to_json());
        match doc {
            Value::Object(map) => out.extend(map),
            other => {
                out.insert("result".into(), other);
            }
        }
        Value::Object(out)
    }

    /// One-line comment carrying the manifest, for CSV and DOT output.
    pub fn comment(&self, prefix: &str) -> String {
        format!("{prefix} manifest: {}\n", self.to_json())
    }
}
