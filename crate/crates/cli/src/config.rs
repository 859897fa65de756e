//! Configuration loading: preset, then file, then `--set` overrides.

use std::fmt;
use std::path::Path;

use anyhow::{Context, Result};
use qwrad::scenario::ScenarioConfig;
use toml::{Table, Value};

/// Invalid configuration content (exit code 2).
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

/// Read a config document: flat TOML with dotted keys, or a JSON manifest
/// written by a previous run (its `config` block is used).
fn read_file(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        let doc: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let cfg = doc
            .get("config")
            .ok_or_else(|| invalid(format!("{}: manifest has no config block", path.display())))?;
        let cfg: ScenarioConfig =
            serde_json::from_value(cfg.clone()).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        return to_table(&cfg);
    }
    text.parse::<Table>()
        .map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn to_table(cfg: &ScenarioConfig) -> Result<Table> {
    match Value::try_from(cfg)? {
        Value::Table(t) => Ok(t),
        _ => unreachable!("config serializes to a table"),
    }
}

fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Parse one `key=value` override. Values use TOML syntax; anything that
/// does not parse is taken as a bare string.
fn parse_set(spec: &str) -> Result<(Vec<String>, Value)> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| invalid(format!("--set '{spec}' is not KEY=VALUE")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(|p| p.trim().is_empty()) {
        return Err(invalid(format!("--set '{spec}' has an empty key")));
    }
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => Value::String(raw.to_string()),
    };
    Ok((key.split('.').map(|p| p.trim().to_string()).collect(), value))
}

fn insert_path(table: &mut Table, path: &[String], value: Value) -> Result<()> {
    let (last, parents) = path.split_last().expect("non-empty key");
    let mut t = table;
    for p in parents {
        let entry = t.entry(p.clone()).or_insert_with(|| Value::Table(Table::new()));
        t = entry
            .as_table_mut()
            .ok_or_else(|| invalid(format!("'{p}' is not a section")))?;
    }
    t.insert(last.clone(), value);
    Ok(())
}

/// Effective configuration from the three layers.
pub fn load(preset: Option<&str>, file: Option<&Path>, sets: &[String]) -> Result<ScenarioConfig> {
    let file_table = file.map(read_file).transpose()?.unwrap_or_default();
    let file_preset = match file_table.get("preset") {
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(invalid("preset must be a string")),
        None => None,
    };
    let name = preset.map(str::to_string).or(file_preset);
    let mut table = match &name {
        Some(n) => to_table(&ScenarioConfig::preset(n).map_err(|e| invalid(e.to_string()))?)?,
        None => Table::new(),
    };
    merge(&mut table, file_table);
    for s in sets {
        let (path, value) = parse_set(s)?;
        if path.len() == 1 && path[0] == "preset" {
            return Err(invalid("use --preset to select a preset"));
        }
        insert_path(&mut table, &path, value)?;
    }
    if let Some(n) = name {
        table.insert("preset".into(), Value::String(n));
    }
    Value::Table(table)
        .try_into::<ScenarioConfig>()
        .map_err(|e| invalid(format!("invalid configuration: {e}")))
}

/// Flat `section.key = value` rendering of a configuration.
pub fn to_flat_toml(cfg: &ScenarioConfig) -> Result<String> {
    fn walk(prefix: &str, t: &Table, out: &mut String) {
        for (k, v) in t {
            let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            match v {
                Value::Table(sub) => walk(&key, sub, out),
                v => out.push_str(&format!("{key} = {v}\n")),
            }
        }
    }
    let mut out = String::new();
    walk("", &to_table(cfg)?, &mut out);
    Ok(out)
}
