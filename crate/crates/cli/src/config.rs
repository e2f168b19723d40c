//! Layered configuration: built-in defaults < config file < command-line flags.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

/// Parse a config file as TOML or JSON, chosen by extension (TOML by default).
pub fn load_file(path: &Path) -> anyhow::Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let value = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?,
        _ => {
            let t: toml::Table = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            serde_json::to_value(t)?
        }
    };
    if !value.is_object() {
        bail!("config {} must be a table", path.display());
    }
    Ok(value)
}

/// Keys for `command` from a config file: top-level scalars and tables,
/// overridden by a `[command]` section when present.
fn section(file: &Value, command: &str) -> Map<String, Value> {
    let mut out = Map::new();
    if let Some(obj) = file.as_object() {
        for (k, v) in obj {
            if k != command {
                out.insert(k.clone(), v.clone());
            }
        }
        if let Some(Value::Object(sec)) = obj.get(command) {
            for (k, v) in sec {
                out.insert(k.clone(), v.clone());
            }
        }
    }
    out
}

/// Overlay `args` (unset flags serialize as absent) on the file section and
/// deserialize the result. Unknown keys in the file are ignored.
pub fn merge<T: Serialize + DeserializeOwned>(file: Option<&Value>, command: &str, args: &T) -> anyhow::Result<T> {
    let mut merged = file.map(|f| section(f, command)).unwrap_or_default();
    if let Value::Object(flags) = serde_json::to_value(args)? {
        for (k, v) in flags {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).with_context(|| format!("invalid configuration for `{command}`"))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the command and its fully resolved configuration. `serde_json`
/// maps are ordered by key, so the encoding is canonical.
pub fn config_hash(command: &str, config: &Value) -> anyhow::Result<String> {
    let doc = serde_json::json!({ "command": command, "config": config });
    Ok(sha256_hex(&serde_json::to_vec(&doc)?))
}

/// clap value parser for enums that serialize as kebab-case strings.
pub fn kebab<T: DeserializeOwned>(raw: &str) -> Result<T, String> {
    serde_json::from_value(Value::String(raw.to_string())).map_err(|e| e.to_string())
}
