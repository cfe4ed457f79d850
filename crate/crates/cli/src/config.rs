use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use oamwalk::lattice::{OpticalElement, StepSequence};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

/// Reads the JSON object at `path` (or `{}`), applies `key=value` overrides
/// and deserializes the result.
pub fn load<T: DeserializeOwned>(path: Option<&Path>, sets: &[String]) -> Result<T, CliError> {
    let mut root = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| CliError::Io {
                path: p.display().to_string(),
                source,
            })?;
            serde_json::from_str::<Value>(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => Value::Object(Map::new()),
    };
    if !root.is_object() {
        return Err(CliError::Config("config root must be a JSON object".into()));
    }
    for set in sets {
        apply_override(&mut root, set)?;
    }
    serde_json::from_value(root).map_err(|e| CliError::Config(e.to_string()))
}

/// Sets a dotted key; the value is parsed as JSON and kept as a string otherwise.
pub fn apply_override(root: &mut Value, set: &str) -> Result<(), CliError> {
    let (key, raw) = set
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set {set:?}: expected key=value")))?;
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::Config(format!("--set {set:?}: empty key segment")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let map = match node {
            Value::Object(map) => map,
            _ => {
                return Err(CliError::Config(format!(
                    "--set {key}: {} is not an object",
                    parts[..i].join(".")
                )))
            }
        };
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!("key has at least one segment")
}

/// Walk step as a named preset with a q-plate retardance, or as explicit elements.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<OpticalElement>>,
}

impl SequenceConfig {
    #[cfg(test)]
    pub fn preset(name: &str, delta: f64) -> Self {
        Self {
            preset: Some(name.into()),
            delta: Some(delta),
            elements: None,
        }
    }

    /// Fills in `default_preset` and `δ = π` where absent and builds the sequence.
    pub fn resolve(&mut self, default_preset: &str) -> Result<StepSequence, CliError> {
        if let Some(elements) = &self.elements {
            if self.preset.is_some() || self.delta.is_some() {
                return Err(CliError::Config(
                    "sequence: give either elements or preset/delta, not both".into(),
                ));
            }
            return Ok(StepSequence::new(elements.clone())?);
        }
        let name = self.preset.get_or_insert_with(|| default_preset.to_string());
        let delta = *self.delta.get_or_insert(PI);
        Ok(StepSequence::preset(name, delta)?)
    }
}

/// Parses a JSON complex number `[re, im]` or a bare real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Pair([f64; 2]),
    Real(f64),
}

impl ComplexValue {
    pub fn value(self) -> num_complex::Complex64 {
        match self {
            ComplexValue::Pair([re, im]) => num_complex::Complex64::new(re, im),
            ComplexValue::Real(re) => num_complex::Complex64::new(re, 0.0),
        }
    }
}
