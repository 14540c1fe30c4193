use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use super::CliError;

/// Keys accepted in a config file; each mirrors the flag of the same name
/// with dashes replaced by underscores.
pub const KEYS: &[&str] = &[
    "alpha1",
    "alpha2",
    "beta1",
    "beta2",
    "mu1",
    "mu2",
    "lambda",
    "r",
    "alpha0",
    "beta",
    "mu",
    "sweep",
    "replicates",
    "horizon",
    "seed",
    "out",
    "format",
    "threads",
    "init",
    "grid",
    "cap",
    "dim",
    "eps",
    "radius",
    "dt",
    "paths",
    "bridge",
    "x0",
    "y0",
    "z0",
    "runs",
    "table",
    "k_max",
];

/// Flat `key = value` file. Blank lines and lines starting with `#` are
/// ignored; `sweep` may repeat, any other key keeps its last value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, Vec<String>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("config line {}: expected key = value", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(CliError::usage(format!("config line {}: unknown key `{k}`", i + 1)));
            }
            let slot = entries.entry(k.to_string()).or_default();
            if k != "sweep" {
                slot.clear();
            }
            slot.push(v.to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).and_then(|v| v.last()).map(String::as_str)
    }

    pub fn all(&self, key: &str) -> &[String] {
        self.entries.get(key).map_or(&[], Vec::as_slice)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| CliError::usage(format!("config key `{key}`: cannot parse `{v}`")))
            })
            .transpose()
    }

    /// Flag value, else config value, else `default`.
    pub fn resolve<T: FromStr>(&self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError> {
        Ok(match flag {
            Some(v) => v,
            None => self.get(key)?.unwrap_or(default),
        })
    }
}
