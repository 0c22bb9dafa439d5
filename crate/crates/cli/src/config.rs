//! Flag/config-file merging and output with a `.meta.json` sidecar.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{config_error, CliError};

/// Overlays the flags that were given on top of the JSON object in `config`.
pub fn resolve<T>(flags: &T, config: Option<&Path>) -> Result<T, CliError>
where
    T: Serialize + DeserializeOwned,
{
    let over = serde_json::to_value(flags).map_err(|e| config_error("flags", e))?;
    let Some(path) = config else {
        return serde_json::from_value(over).map_err(|e| config_error("flags", e));
    };
    let what = format!("--config {}", path.display());
    let text = fs::read_to_string(path).map_err(|e| config_error(&what, e))?;
    let base: Value = serde_json::from_str(&text).map_err(|e| config_error(&what, e))?;
    let Value::Object(mut merged) = base else {
        return Err(config_error(&what, "expected a JSON object"));
    };
    if let Value::Object(given) = over {
        for (k, v) in given {
            let unset = v.is_null() || v.as_array().is_some_and(Vec::is_empty);
            if !unset {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| config_error(&what, e))
}

/// Provenance written next to every output file.
#[derive(Debug, Clone, Serialize)]
pub struct Meta<'a, C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a C,
    #[serde(skip_serializing_if = "Map::is_empty")]
    pub derived: Map<String, Value>,
}

impl<'a, C: Serialize> Meta<'a, C> {
    pub fn new(command: &'a str, config: &'a C) -> Self {
        Meta {
            tool: "privamp",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            derived: Map::new(),
        }
    }

    pub fn derived(mut self, key: &str, value: Value) -> Self {
        self.derived.insert(key.to_owned(), value);
        self
    }
}

/// `<out>.meta.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    out.with_file_name(name)
}

/// Writes `content` to `out` (plus sidecar) or to `stdout` when no path is given.
pub fn emit<C: Serialize>(
    out: Option<&Path>,
    content: &str,
    meta: &Meta<'_, C>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    match out {
        Some(path) => write_with_meta(path, content, meta),
        None => stdout
            .write_all(content.as_bytes())
            .map_err(|e| config_error("stdout", e)),
    }
}

pub fn write_with_meta<C: Serialize>(path: &Path, content: &str, meta: &Meta<'_, C>) -> Result<(), CliError> {
    let what = format!("--out {}", path.display());
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| config_error(&what, e))?;
    }
    fs::write(path, content).map_err(|e| config_error(&what, e))?;
    let mut json = serde_json::to_string_pretty(meta).map_err(|e| config_error(&what, e))?;
    json.push('\n');
    fs::write(sidecar_path(path), json).map_err(|e| config_error(&what, e))
}
