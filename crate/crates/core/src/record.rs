//! Flat `key=value` records used for kernel, domain and field specs.

use crate::error::{Error, Result};

/// Ordered list of key/value pairs parsed from `k=v,k=v` text.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record {
    entries: Vec<(String, String)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut rec = Record::new();
        for item in text.split([',', ';']).map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Record(format!("`{item}` is not of the form key=value")))?;
            let k = k.trim();
            if rec.get(k).is_some() {
                return Err(Error::Record(format!("duplicate key `{k}`")));
            }
            rec.entries.push((k.to_string(), v.trim().to_string()));
        }
        Ok(rec)
    }

    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push_opt(&mut self, key: &str, value: Option<f64>) -> &mut Self {
        if let Some(v) = value {
            self.push(key, v);
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// Reject keys outside `allowed`, naming the valid ones.
    pub fn check_keys(&self, what: &str, allowed: &[&str]) -> Result<()> {
        for (k, _) in &self.entries {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::Record(format!(
                    "unknown {what} key `{k}`; valid keys: {}",
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn required(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Record(format!("missing required key `{key}`")))
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Record(format!("`{key}={v}` is not a number")))
            })
            .transpose()
    }

    pub fn f64_req(&self, key: &str) -> Result<f64> {
        self.f64(key)?
            .ok_or_else(|| Error::Record(format!("missing required key `{key}`")))
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| Error::Record(format!("`{key}={v}` is not a nonnegative integer")))
            })
            .transpose()
    }

    /// Comma separated values are not allowed inside a record, so lists use `:`.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key)
            .map(|v| {
                v.split(':')
                    .map(|x| {
                        x.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::Record(format!("`{key}` entry `{x}` is not a number")))
                    })
                    .collect()
            })
            .transpose()
    }
}

impl std::fmt::Display for Record {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(","))
    }
}
