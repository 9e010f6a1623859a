//! Flat `key = value` run configuration.
//!
//! One pair per line, `#` starts a comment, later keys override earlier
//! ones. The hash is taken over the sorted canonical `key=value\n` lines, so
//! it ignores ordering, whitespace and comments. A run manifest is written in
//! the same format, which makes `--config manifest` a replay.

use crate::error::{Error, Result};
use crate::grid::{GridSpec, GRID_KEYS};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn new() -> Self {
        Config::default()
    }

    /// The default grid's keys.
    pub fn with_default_grid() -> Self {
        Config { entries: GridSpec::default().to_kv() }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            cfg.set_pair(line).map_err(|e| Error::Format(format!("line {}: {e}", no + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("expected key=value, got {pair:?}")))?;
        let k = k.trim();
        if k.is_empty() || k.chars().any(char::is_whitespace) {
            return Err(Error::Format(format!("invalid key {k:?}")));
        }
        self.set(k, v.trim());
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn merge(&mut self, other: &Config) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::MissingKey(key.to_string()))
    }

    pub fn parse_key<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.require(key)?;
        raw.parse().map_err(|_| Error::BadKey { key: key.to_string(), reason: format!("cannot parse {raw:?}") })
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.get(key) {
            None => Ok(default),
            Some(_) => self.parse_key(key),
        }
    }

    /// Reads a float; `inf` and `∞` are accepted.
    pub fn parse_f64(&self, key: &str) -> Result<f64> {
        let raw = self.require(key)?;
        parse_real(raw).ok_or_else(|| Error::BadKey { key: key.to_string(), reason: format!("cannot parse {raw:?}") })
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(_) => self.parse_f64(key),
        }
    }

    /// All grid keys are required.
    pub fn grid_spec(&self) -> Result<GridSpec> {
        for k in GRID_KEYS {
            self.require(k)?;
        }
        GridSpec::from_kv(&self.entries)
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    pub fn canonical(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn parse_real(raw: &str) -> Option<f64> {
    match raw.trim() {
        "inf" | "infinity" | "∞" | "+inf" => Some(f64::INFINITY),
        s => {
            // allow simple fractions such as 1/16
            if let Some((a, b)) = s.split_once('/') {
                let (a, b): (f64, f64) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
                Some(a / b)
            } else {
                s.parse().ok()
            }
        }
    }
}

/// Everything needed to re-execute a run, plus what it produced.
#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub config: Config,
    pub version: String,
    pub wall_clock_secs: f64,
    pub verdicts: Vec<String>,
}

impl RunManifest {
    /// The effective config as a replayable key=value file; run metadata goes
    /// into comments so that replaying does not change the hash.
    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("# command: {}\n", self.command_line.join(" ")));
        s.push_str(&format!("# config_hash={}\n", self.config.hash()));
        s.push_str(&format!("# version: {}\n", self.version));
        s.push_str(&format!("# wall_clock_secs: {:.3}\n", self.wall_clock_secs));
        for v in &self.verdicts {
            s.push_str(&format!("# verdict: {v}\n"));
        }
        s.push_str(&self.config.canonical());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_order_do_not_change_hash() {
        let a = Config::parse("b = 2\n# note\na=1\n").unwrap();
        let b = Config::parse("a=1   # trailing\nb=2").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn missing_grid_key_is_named() {
        let mut c = Config::with_default_grid();
        c.entries.remove("d1");
        match c.grid_spec() {
            Err(Error::MissingKey(k)) => assert_eq!(k, "d1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fractions() {
        assert_eq!(parse_real("1/16"), Some(0.0625));
        assert_eq!(parse_real("inf"), Some(f64::INFINITY));
    }
}
