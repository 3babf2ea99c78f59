//! Run configuration: an optional TOML file of per-module sections plus
//! `key=value` overrides. Precedence is module default < file < override <
//! explicit flag.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Default)]
pub struct RunConfig {
    pub seed: Option<u64>,
    sections: Map<String, Value>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: &[String], seed_flag: Option<u64>) -> Result<Self> {
        let mut sections = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                let table: toml::Table = toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
                match serde_json::to_value(table)? {
                    Value::Object(m) => m,
                    _ => unreachable!("a TOML table serializes to an object"),
                }
            }
            None => Map::new(),
        };
        for o in overrides {
            let (key, raw) = o
                .split_once('=')
                .with_context(|| format!("override `{o}` is not of the form key=value"))?;
            set_path(&mut sections, key.trim(), parse_scalar(raw.trim()))?;
        }
        let file_seed = match sections.remove("seed") {
            Some(v) => Some(v.as_u64().context("`seed` must be a non-negative integer")?),
            None => None,
        };
        Ok(RunConfig {
            seed: seed_flag.or(file_seed),
            sections,
        })
    }

    /// The effective seed; 0 when neither flag nor file sets one.
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// Overlay section `name` onto `base`.
    pub fn section<T: Serialize + DeserializeOwned>(&self, name: &str, base: T) -> Result<T> {
        let Some(overlay) = self.sections.get(name) else {
            return Ok(base);
        };
        let mut v = serde_json::to_value(base)?;
        merge(&mut v, overlay.clone());
        serde_json::from_value(v).with_context(|| format!("invalid [{name}] configuration"))
    }
}

/// A TOML literal if it parses as one, otherwise a bare string.
fn parse_scalar(raw: &str) -> Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .and_then(|v| serde_json::to_value(v).ok())
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn set_path(root: &mut Map<String, Value>, key: &str, value: Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        bail!("malformed override key `{key}`");
    }
    let mut node = root;
    for p in &parts[..parts.len() - 1] {
        let slot = node.entry(p.to_string()).or_insert_with(|| Value::Object(Map::new()));
        node = match slot {
            Value::Object(m) => m,
            _ => bail!("override key `{key}`: `{p}` is not a table"),
        };
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}
