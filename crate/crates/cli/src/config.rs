//! Flat `key = value` configuration files.
//!
//! One entry per line; `#` starts a comment; blank lines are ignored. Keys
//! are unique. Relative paths in values resolve against the directory of the
//! config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
    base_dir: PathBuf,
}

fn invalid(msg: String) -> CliError {
    CliError::Validation(msg)
}

impl KvConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base_dir).map_err(|e| invalid(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str, base_dir: PathBuf) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("line {}: expected `key = value`", i + 1)))?;
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(invalid(format!("line {}: invalid key `{key}`", i + 1)));
            }
            if entries
                .insert(key.to_string(), value.trim().to_string())
                .is_some()
            {
                return Err(invalid(format!("line {}: duplicate key `{key}`", i + 1)));
            }
        }
        Ok(Self { entries, base_dir })
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    /// Rejects keys outside `allowed`; `seed` is accepted everywhere.
    pub fn allow(&self, allowed: &[&str]) -> CliResult<()> {
        match self
            .entries
            .keys()
            .find(|k| *k != "seed" && !allowed.contains(&k.as_str()))
        {
            Some(k) => Err(invalid(format!(
                "unknown config key `{k}`; expected one of: seed, {}",
                allowed.join(", ")
            ))),
            None => Ok(()),
        }
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> CliResult<&str> {
        self.str(key)
            .ok_or_else(|| invalid(format!("missing config key `{key}`")))
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.str(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| invalid(format!("config key `{key}`: cannot parse `{v}`: {e}")))
            })
            .transpose()
    }

    pub fn or<T: FromStr>(&self, key: &str, default: T) -> CliResult<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    pub fn required<T: FromStr>(&self, key: &str) -> CliResult<T>
    where
        T::Err: std::fmt::Display,
    {
        self.parsed(key)?
            .ok_or_else(|| invalid(format!("missing config key `{key}`")))
    }

    /// Comma-separated reals; an empty value is an empty list.
    pub fn reals(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        self.str(key).map(|v| parse_reals(key, v)).transpose()
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.str(key).map(|v| self.base_dir.join(v))
    }

    pub fn require_path(&self, key: &str) -> CliResult<PathBuf> {
        self.require(key).map(|v| self.base_dir.join(v))
    }
}

pub fn parse_reals(key: &str, text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|e| invalid(format!("config key `{key}`: `{s}`: {e}")))
        })
        .collect()
}
