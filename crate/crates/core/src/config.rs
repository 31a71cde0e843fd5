//! `key = value` text files used for manifests and experiment recipes.
//!
//! Blank lines and lines starting with `#` are ignored. Keys may appear
//! once. Overrides replace file values and are reported at line 0.

use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    /// 1-based source line, 0 for command-line overrides.
    pub line: usize,
}

impl Entry {
    pub fn parse<T: FromStr>(&self) -> Result<T> {
        self.value
            .parse::<T>()
            .map_err(|_| Error::Config { line: self.line, message: format!("cannot parse {} = {:?}", self.key, self.value) })
    }

    /// Comma-separated list.
    pub fn parse_list<T: FromStr>(&self) -> Result<Vec<T>> {
        self.value
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<T>()
                    .map_err(|_| Error::Config { line: self.line, message: format!("cannot parse element {s:?} of {}", self.key) })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyValues {
    entries: Vec<Entry>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = KeyValues::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Config { line: i + 1, message: format!("expected `key = value`, found {line:?}") });
            };
            let key = k.trim();
            if key.is_empty() {
                return Err(Error::Config { line: i + 1, message: "empty key".into() });
            }
            if let Some(prev) = kv.get(key) {
                return Err(Error::Config { line: i + 1, message: format!("duplicate key {key:?} (first at line {})", prev.line) });
            }
            kv.entries.push(Entry { key: key.to_string(), value: v.trim().to_string(), line: i + 1 });
        }
        Ok(kv)
    }

    /// Applies `key=value` overrides on top of the parsed file.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for o in overrides {
            let o = o.as_ref();
            let Some((k, v)) = o.split_once('=') else {
                return Err(Error::Config { line: 0, message: format!("override {o:?} is not key=value") });
            };
            self.set(k.trim(), v.trim());
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) {
        match self.entries.iter_mut().find(|e| e.key == key) {
            Some(e) => {
                e.value = value.to_string();
                e.line = 0;
            }
            None => self.entries.push(Entry { key: key.to_string(), value: value.to_string(), line: 0 }),
        }
    }

    /// Inserts `entry`, replacing any entry with the same key.
    pub fn insert(&mut self, entry: Entry) {
        match self.entries.iter_mut().find(|e| e.key == entry.key) {
            Some(e) => *e = entry,
            None => self.entries.push(entry),
        }
    }

    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn required(&self, key: &str) -> Result<&Entry> {
        self.get(key).ok_or_else(|| Error::Config { line: 0, message: format!("missing required key {key:?}") })
    }

    /// Parsed value of `key`, or `default` when absent.
    pub fn value_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        self.get(key).map_or(Ok(default), Entry::parse)
    }

    /// Rejects keys outside `known`.
    pub fn reject_unknown(&self, known: &[&str]) -> Result<()> {
        match self.entries.iter().find(|e| !known.contains(&e.key.as_str())) {
            Some(e) => Err(Error::Config { line: e.line, message: format!("unknown key {:?}", e.key) }),
            None => Ok(()),
        }
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }
}
