//! Reproducible run manifests and the line-based config format.
//!
//! A manifest captures everything a run depends on — subcommand, string
//! parameters, budget, seed, output format — in a canonical JSON form.
//! Maps are ordered, so serialization round-trips byte-identically and
//! identical manifests rerun to identical outputs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("config line {0}: expected `key = value`")]
    BadConfigLine(usize),
    #[error("duplicate config key `{0}`")]
    DuplicateKey(String),
    #[error("manifest JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Table,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "table" => Ok(OutputFormat::Table),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Manifest {
    pub command: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl Manifest {
    pub fn new(command: impl Into<String>) -> Self {
        Manifest { command: command.into(), ..Default::default() }
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.parameters.insert(key.into(), value.to_string());
        self
    }

    /// Canonical serialization: keys sorted, stable field order.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self, ManifestError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Line-based `key = value` config. Blank lines and `#` comments are
/// skipped; keys must be unique; values keep internal whitespace.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, ManifestError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or(ManifestError::BadConfigLine(i + 1))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ManifestError::BadConfigLine(i + 1));
        }
        if out.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(ManifestError::DuplicateKey(key.to_string()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_identity() {
        let mut m = Manifest::new("cset enum");
        m.set("expr", "ni(sqrt(2)*n)").set("delta", "1/10");
        m.budget = Some(1 << 16);
        m.format = OutputFormat::Csv;
        let text = m.to_json_string();
        let back = Manifest::from_json_str(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_json_string(), text);
    }

    #[test]
    fn config_parsing() {
        let cfg = parse_config("# comment\nbudget = 65536\n\nformat = json\n").unwrap();
        assert_eq!(cfg["budget"], "65536");
        assert_eq!(cfg["format"], "json");
        assert!(parse_config("no-equals-here").is_err());
        assert!(parse_config("a = 1\na = 2").is_err());
    }
}
