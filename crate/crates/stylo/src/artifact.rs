//! Output artifacts: every command writes a JSON file that embeds a
//! reproducibility stanza (resolved parameters, seed, digests of every input
//! file), so a rerun with the same inputs and seed is byte-identical.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use stylometry::digest::fnv1a64_hex;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunStanza {
    pub command: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub inputs: BTreeMap<String, String>,
}

impl RunStanza {
    pub fn new(command: &str, params: serde_json::Value, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            params,
            seed,
            inputs: BTreeMap::new(),
        }
    }

    /// Record a digest of one input file's bytes.
    pub fn record_input(&mut self, path: &Path) {
        let digest = match std::fs::read(path) {
            Ok(bytes) => fnv1a64_hex(&bytes),
            Err(_) => "unreadable".to_string(),
        };
        self.inputs.insert(path.display().to_string(), digest);
    }
}

/// Serialize pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .context("serializing output artifact")?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Deterministic float formatting for CSV cells; infinities print as "inf".
pub fn csv_f64(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}

/// Quote a CSV field only when it needs it.
pub fn csv_field(value: &str) -> String {
    if value.contains(',') || value.contains('"') || value.contains('\n') {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

/// The CSV sibling of a JSON artifact path (`out.json` -> `out.csv`).
pub fn csv_sibling(json_path: &Path) -> std::path::PathBuf {
    json_path.with_extension("csv")
}
