//! Flat `key = value` configuration files.
//!
//! One pair per line; `#` starts a comment; blank lines are ignored. Keys are
//! lower-case with underscores and map one-to-one onto CLI flags
//! (`n_grid` ↔ `--n-grid`). Later layers override earlier ones.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{AbcError, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(AbcError::Config(format!("line {}: expected `key = value`", i + 1)));
            };
            let key = k.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_') {
                return Err(AbcError::Config(format!("line {}: invalid key '{key}'", i + 1)));
            }
            cfg.set(key, v.trim());
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AbcError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    /// `other` wins on conflicts.
    pub fn merge(&mut self, other: &Config) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Fails on the first key not in `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.values.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(AbcError::Config(format!("unknown key '{k}'"))),
            None => Ok(()),
        }
    }

    pub fn get_str(&self, key: &str) -> Result<&str> {
        self.values.get(key).map(String::as_str).ok_or_else(|| AbcError::Config(format!("missing key '{key}'")))
    }

    pub fn get_opt(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.get_str(key)?;
        parse_scalar(raw).ok_or_else(|| AbcError::Config(format!("key '{key}': cannot parse '{raw}'")))
    }

    pub fn get_list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>> {
        let raw = self.get_str(key)?;
        raw.split(',')
            .map(|s| parse_scalar(s.trim()))
            .collect::<Option<Vec<T>>>()
            .filter(|v| !v.is_empty())
            .ok_or_else(|| AbcError::Config(format!("key '{key}': cannot parse list '{raw}'")))
    }

    /// `key = value` lines, sorted by key.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

/// Parses a scalar; integers also accept float notation such as `1e6`.
fn parse_scalar<T: std::str::FromStr>(s: &str) -> Option<T> {
    if let Ok(v) = s.parse::<T>() {
        return Some(v);
    }
    let f: f64 = s.parse().ok()?;
    if f.fract() == 0.0 && f.abs() < 9.0e15 {
        format!("{}", f as i64).parse().ok()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_override() {
        let mut a = Config::parse("# header\nmodel = linear\nn_grid = 100, 1e4 # trailing\n\n").unwrap();
        assert_eq!(a.get_str("model").unwrap(), "linear");
        assert_eq!(a.get_list::<u64>("n_grid").unwrap(), vec![100, 10_000]);
        let b = Config::parse("model = flat").unwrap();
        a.merge(&b);
        assert_eq!(a.get_str("model").unwrap(), "flat");
    }

    #[test]
    fn render_round_trips() {
        let a = Config::parse("b = 2\na = x y").unwrap();
        assert_eq!(a.render(), "a = x y\nb = 2\n");
        assert_eq!(Config::parse(&a.render()).unwrap(), a);
    }

    #[test]
    fn errors() {
        assert!(Config::parse("novalue").is_err());
        assert!(Config::parse("Bad-Key = 1").is_err());
        let c = Config::parse("x = abc").unwrap();
        assert!(c.get::<f64>("x").is_err());
        assert!(c.get::<f64>("y").is_err());
        assert!(c.check_keys(&["y"]).is_err());
        assert_eq!(Config::parse("n = 2.5").unwrap().get::<u64>("n").ok(), None);
    }
}
