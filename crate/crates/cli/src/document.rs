//! Loading config files, `--override` edits and sweep-path substitution.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::{Table, Value};

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// `key=value` from the command line. The value is read as a TOML literal
/// and falls back to a bare string.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub path: String,
    pub value: Value,
}

impl std::str::FromStr for Override {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (path, raw) = s.split_once('=').ok_or_else(|| format!("override `{s}` is not of the form key=value"))?;
        let path = path.trim();
        if path.is_empty() {
            return Err(format!("override `{s}` has an empty key"));
        }
        Ok(Self { path: path.to_string(), value: parse_literal(raw.trim()) })
    }
}

pub fn parse_literal(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Replaces the value at a dotted `path`. Missing leaf keys in tables are
/// created so the schema can reject them by name. Returns the number of
/// locations written.
pub fn set_path(root: &mut Value, path: &str, value: &Value) -> Result<usize, String> {
    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(format!("malformed path `{path}`"));
    }
    set_segments(root, &segments, value, path)
}

fn set_segments(node: &mut Value, rest: &[&str], value: &Value, path: &str) -> Result<usize, String> {
    let Some((head, tail)) = rest.split_first() else {
        *node = value.clone();
        return Ok(1);
    };
    match node {
        Value::Array(items) if *head == "*" => {
            let mut n = 0;
            for item in items.iter_mut() {
                n += set_segments(item, tail, value, path)?;
            }
            Ok(n)
        }
        Value::Array(items) => {
            let len = items.len();
            let idx: usize = head.parse().map_err(|_| format!("`{head}` in `{path}` indexes an array"))?;
            let item =
                items.get_mut(idx).ok_or_else(|| format!("index {idx} in `{path}` is out of range (len {len})"))?;
            set_segments(item, tail, value, path)
        }
        Value::Table(t) => match t.get_mut(*head) {
            Some(child) => set_segments(child, tail, value, path),
            None if tail.is_empty() => {
                t.insert(head.to_string(), value.clone());
                Ok(1)
            }
            None => Err(format!("`{head}` in `{path}` does not exist")),
        },
        _ => Err(format!("`{head}` in `{path}` descends into a scalar")),
    }
}

/// A config file read from disk, before resolution.
#[derive(Debug, Clone)]
pub struct Document {
    pub path: PathBuf,
    pub text: String,
    pub table: Table,
}

impl Document {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let table = text.parse::<Table>().map_err(|e| CliError::parse(path, &text, &e))?;
        Ok(Self { path: path.to_path_buf(), text, table })
    }

    /// Applies overrides, checks the schema and fills defaults.
    pub fn resolve(&self, overrides: &[Override]) -> Result<ExperimentConfig, CliError> {
        let parsed = if overrides.is_empty() {
            // Deserializing the original text keeps line numbers in errors.
            toml::from_str::<ExperimentConfig>(&self.text).map_err(|e| CliError::parse(&self.path, &self.text, &e))?
        } else {
            let mut root = Value::Table(self.table.clone());
            for o in overrides {
                set_path(&mut root, &o.path, &o.value).map_err(CliError::Override)?;
            }
            ExperimentConfig::deserialize(root).map_err(|e| CliError::Schema {
                path: self.path.clone(),
                message: format!("{} (after overrides)", e.message().trim()),
            })?
        };
        parsed.resolve().map_err(|message| CliError::Schema { path: self.path.clone(), message })
    }
}

/// The resolved config with `param` replaced by `value`, resolved again.
pub fn sweep_point(base: &ExperimentConfig, param: &str, value: &Value) -> Result<ExperimentConfig, CliError> {
    let mut root = Value::try_from(base).map_err(|e| CliError::Sweep(e.to_string()))?;
    if set_path(&mut root, param, value).map_err(CliError::Sweep)? == 0 {
        return Err(CliError::Sweep(format!("`{param}` matches no entries")));
    }
    let cfg = ExperimentConfig::deserialize(root)
        .map_err(|e| CliError::Sweep(format!("{param} = {value}: {}", e.message().trim())))?;
    cfg.resolve().map_err(|e| CliError::Sweep(format!("{param} = {value}: {e}")))
}
