//! Flat `key = value` configuration files.
//!
//! Each key names one field of the ingest, cascade, restore or opening
//! settings. `#` starts a comment.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::ingest::IngestConfig;
use crate::openings::OpeningConfig;
use crate::raster::RestoreConfig;
use crate::wall_pipeline::PipelineConfig;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FloorscanConfig {
    pub ingest: IngestConfig,
    pub pipeline: PipelineConfig,
    pub restore: RestoreConfig,
    pub openings: OpeningConfig,
}

const SECTIONS: [&str; 4] = ["ingest", "pipeline", "restore", "openings"];

impl FloorscanConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let i = &self.ingest;
        if !(i.chord_tol > 0.0 && i.cluster_threshold > 0.0 && i.chord_tol.is_finite() && i.cluster_threshold.is_finite()) {
            return Err(ConfigError::Invalid("chord_tol and cluster_threshold must be positive".into()));
        }
        self.pipeline.validate().map_err(ConfigError::Invalid)?;
        self.restore.validate().map_err(ConfigError::Invalid)?;
        self.openings.validate().map_err(ConfigError::Invalid)?;
        Ok(())
    }

    /// All keys with their current values, in section order.
    pub fn entries(&self) -> Vec<(String, Value)> {
        let tree = serde_json::to_value(self).expect("config serializes");
        let mut out = Vec::new();
        for s in SECTIONS {
            if let Value::Object(m) = &tree[s] {
                out.extend(m.iter().map(|(k, v)| (k.clone(), v.clone())));
            }
        }
        out
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), String> {
        let mut tree = serde_json::to_value(*self).expect("config serializes");
        let section = SECTIONS
            .iter()
            .find(|s| tree[**s].get(key).is_some())
            .ok_or_else(|| format!("unknown key `{key}`"))?;
        let slot: &mut Map<String, Value> = tree[*section].as_object_mut().expect("sections are objects");
        let value = match &slot[key] {
            Value::Bool(_) => raw.parse::<bool>().map(Value::Bool).map_err(|_| format!("`{key}` expects true or false"))?,
            Value::Number(n) if n.is_u64() => {
                raw.parse::<u64>().map(Value::from).map_err(|_| format!("`{key}` expects a non-negative integer"))?
            }
            _ => {
                let v: f64 = raw.parse().map_err(|_| format!("`{key}` expects a number"))?;
                if !v.is_finite() {
                    return Err(format!("`{key}` must be finite"));
                }
                Value::from(v)
            }
        };
        slot.insert(key.to_string(), value);
        *self = serde_json::from_value(tree).map_err(|e| e.to_string())?;
        Ok(())
    }
}

pub fn parse_config(text: &str) -> Result<FloorscanConfig, ConfigError> {
    let mut cfg = FloorscanConfig::default();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |message: String| ConfigError::Line { line: line_no, message };
        let (k, v) = body.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
        cfg.set(k.trim(), v.trim()).map_err(err)?;
    }
    cfg.validate()?;
    Ok(cfg)
}
