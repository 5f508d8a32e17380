//! Flat key-value scenario files.
//!
//! One `key = value` binding per line, `#` starts a comment. Every
//! subcommand declares its schema; unknown keys are rejected so typos
//! cannot silently fall back to defaults.

use std::collections::BTreeMap;

use crate::error::{CoreError, Result};

/// Parsed scenario: ordered key → raw string value.
#[derive(Debug, Clone, Default)]
pub struct Scenario {
    values: BTreeMap<String, String>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CoreError::Scenario {
                key: format!("line {}", lineno + 1),
                reason: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(CoreError::Scenario {
                    key: format!("line {}", lineno + 1),
                    reason: "empty key".into(),
                });
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CoreError::Scenario {
                    key,
                    reason: "duplicate key".into(),
                });
            }
        }
        Ok(Scenario { values })
    }

    /// Reject keys outside the declared schema.
    pub fn check_schema(&self, allowed: &[&str]) -> Result<()> {
        for key in self.values.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(CoreError::Scenario {
                    key: key.clone(),
                    reason: format!("unknown key; allowed: {}", allowed.join(", ")),
                });
            }
        }
        Ok(())
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        let raw = self.values.get(key).ok_or_else(|| CoreError::Scenario {
            key: key.into(),
            reason: "missing required key".into(),
        })?;
        raw.parse().map_err(|_| CoreError::Scenario {
            key: key.into(),
            reason: format!("not a number: `{raw}`"),
        })
    }

    pub fn get_f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.values.get(key) {
            None => Ok(default),
            Some(_) => self.get_f64(key),
        }
    }

    pub fn get_usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.values.get(key) {
            None => Ok(default),
            Some(raw) => raw.parse().map_err(|_| CoreError::Scenario {
                key: key.into(),
                reason: format!("not an integer: `{raw}`"),
            }),
        }
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &String> {
        self.values.keys()
    }

    /// All bindings, ordered, for run manifests.
    pub fn entries(&self) -> impl Iterator<Item = (&String, &String)> {
        self.values.iter()
    }
}
