//! JSON checkpoints of named parameter arrays.
//!
//! Layout:
//!
//! ```json
//! {
//!   "seed": 0,
//!   "config_hash": "<sha256 hex of the config echo>",
//!   "config": { "key": "value", ... },
//!   "params": { "name": { "shape": [r, c], "values": [...] }, ... }
//! }
//! ```
//!
//! Floats are written in shortest round-trip form, so a save/load cycle is
//! exact.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::params::ParamSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamArray {
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub seed: u64,
    pub config_hash: String,
    pub config: BTreeMap<String, String>,
    pub params: BTreeMap<String, ParamArray>,
}

/// Hex SHA-256 of `key=value` lines in key order.
pub fn config_hash(config: &BTreeMap<String, String>) -> String {
    let mut h = Sha256::new();
    for (k, v) in config {
        h.update(k.as_bytes());
        h.update(b"=");
        h.update(v.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

impl Checkpoint {
    pub fn new(seed: u64, config: BTreeMap<String, String>) -> Self {
        Checkpoint {
            seed,
            config_hash: config_hash(&config),
            config,
            params: BTreeMap::new(),
        }
    }

    /// Stores every tensor of `set` under `{prefix}{name}`.
    pub fn insert_set(&mut self, prefix: &str, set: &ParamSet) {
        for (name, t) in set.iter() {
            self.params.insert(
                format!("{prefix}{name}"),
                ParamArray {
                    shape: t.shape().to_vec(),
                    values: t.values().to_vec(),
                },
            );
        }
    }

    /// Overwrites every tensor of `set` with the stored `{prefix}{name}`
    /// array. Missing names and shape mismatches are errors.
    pub fn load_into(&self, prefix: &str, set: &mut ParamSet) -> Result<()> {
        let names: Vec<String> = set.iter().map(|(n, _)| n.to_string()).collect();
        for name in names {
            let key = format!("{prefix}{name}");
            let stored = self
                .params
                .get(&key)
                .ok_or_else(|| Error::Checkpoint(format!("missing parameter `{key}`")))?;
            let t = set.get_mut(&name).expect("name taken from the set");
            if stored.shape != t.shape() {
                return Err(Error::Checkpoint(format!(
                    "`{key}` has shape {:?}, expected {:?}",
                    stored.shape,
                    t.shape()
                )));
            }
            let checked = Tensor::new(stored.shape.clone(), stored.values.clone())
                .map_err(|e| Error::Checkpoint(format!("`{key}`: {e}")))?;
            t.values_mut().copy_from_slice(checked.values());
        }
        Ok(())
    }

    pub fn has_prefix(&self, prefix: &str) -> bool {
        self.params.keys().any(|k| k.starts_with(prefix))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Checkpoint(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if ck.config_hash != config_hash(&ck.config) {
            return Err(Error::Checkpoint("config hash does not match the stored config".into()));
        }
        Ok(ck)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
