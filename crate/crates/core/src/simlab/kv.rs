//! Flat `key=value` text blocks used for model descriptors, experiment
//! specifications and CLI config files.
//!
//! One entry per line. A `#` at the start of a line or after whitespace
//! starts a comment; blank lines are ignored.
//! Keys are unique and keep their insertion order.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KvMap {
    entries: Vec<(String, String)>,
}

impl KvMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut map = Self::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value, got '{line}'", lineno + 1)))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse(format!("line {}: empty key", lineno + 1)));
            }
            if map.get(key).is_some() {
                return Err(Error::Parse(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
            map.entries.push((key.to_string(), value.trim().to_string()));
        }
        Ok(map)
    }

    /// Sets `key`, replacing an existing value in place.
    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some(entry) => entry.1 = value,
            None => self.entries.push((key, value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Parse(format!("missing key '{key}'")))
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Parse(format!("bad value '{v}' for key '{key}'")))
            })
            .transpose()
    }

    pub fn require_parsed<T: FromStr>(&self, key: &str) -> Result<T> {
        self.parsed(key)?.ok_or_else(|| Error::Parse(format!("missing key '{key}'")))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn extend(&mut self, other: &KvMap) {
        for (k, v) in other.iter() {
            self.set(k, v);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for KvMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Comma-separated numbers.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<T>().map_err(|_| Error::Parse(format!("bad list element '{t}' in '{s}'")))
        })
        .collect()
}

pub fn format_list<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn strip_comment(line: &str) -> &str {
    let bytes = line.as_bytes();
    match (0..bytes.len()).find(|&i| bytes[i] == b'#' && (i == 0 || bytes[i - 1].is_ascii_whitespace())) {
        Some(i) => &line[..i],
        None => line,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_round_trip() {
        let text = "# model\nfamily = t\n\nnu=5\ntheta=0.5\n";
        let kv = KvMap::parse(text).unwrap();
        assert_eq!(kv.get("family"), Some("t"));
        assert_eq!(kv.require_parsed::<u32>("nu").unwrap(), 5);
        assert_eq!(kv.keys().collect::<Vec<_>>(), vec!["family", "nu", "theta"]);
        assert_eq!(KvMap::parse(&kv.to_string()).unwrap(), kv);
        let kv = KvMap::parse("out=runs/a#1   # trailing\n  # indented").unwrap();
        assert_eq!(kv.get("out"), Some("runs/a#1"));
    }

    #[test]
    fn errors() {
        assert!(KvMap::parse("a=1\na=2").is_err());
        assert!(KvMap::parse("novalue").is_err());
        assert!(KvMap::parse("=3").is_err());
        let kv = KvMap::parse("x=abc").unwrap();
        assert!(kv.parsed::<f64>("x").is_err());
        assert!(kv.require("y").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list::<f64>("0.25, 0.5").unwrap(), vec![0.25, 0.5]);
        assert_eq!(format_list(&[1, 2, 3]), "1,2,3");
        assert!(parse_list::<f64>("0.25,,0.5").is_err());
    }
}
