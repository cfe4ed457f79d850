use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

pub const TOOL: &str = "oamwalk";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Writes provenance-stamped files into one output directory.
///
/// Every CSV starts with `# oamwalk <version> config=<compact json>` and every
/// JSON file wraps its payload as `{tool, version, command, config, result}`.
pub struct Output {
    dir: PathBuf,
    command: &'static str,
    config: Value,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path, command: &'static str, config: &impl Serialize) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|source| io_error(dir, source))?;
        let config = serde_json::to_value(config).expect("config serializes");
        Ok(Self {
            dir: dir.to_path_buf(),
            command,
            config,
            written: Vec::new(),
        })
    }

    pub fn provenance(&self) -> String {
        format!("{TOOL} {VERSION} {} config={}", self.command, self.config)
    }

    pub fn csv(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let text = format!("# {}\n{body}", self.provenance());
        self.bytes(name, text.as_bytes())
    }

    pub fn json(&mut self, name: &str, result: Value) -> Result<(), CliError> {
        let doc = json!({
            "tool": TOOL,
            "version": VERSION,
            "command": self.command,
            "config": self.config,
            "result": result,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("json serializes");
        text.push('\n');
        self.bytes(name, text.as_bytes())
    }

    pub fn bytes(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, data).map_err(|source| io_error(&path, source))?;
        self.written.push(path);
        Ok(())
    }

    /// Writes `resolved_config.json`, loadable again with `--config`, and
    /// returns every written path.
    pub fn finish(mut self) -> Result<Vec<PathBuf>, CliError> {
        let mut text = serde_json::to_string_pretty(&self.config).expect("json serializes");
        text.push('\n');
        self.bytes("resolved_config.json", text.as_bytes())?;
        Ok(self.written)
    }
}

fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// JSON object keyed by the display form of each key.
pub fn keyed<K: ToString, V: Serialize>(items: impl IntoIterator<Item = (K, V)>) -> Value {
    Value::Object(
        items
            .into_iter()
            .map(|(k, v)| (k.to_string(), serde_json::to_value(v).expect("value serializes")))
            .collect(),
    )
}
