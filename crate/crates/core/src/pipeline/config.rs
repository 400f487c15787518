use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::dsp::DEFAULT_TREND_CUTOFF_HZ;
use crate::ml::{SolverOptions, SvmParams};
use crate::rpeak::DetectorConfig;
use crate::sst::SstConfig;
use crate::{Error, Result};

/// Which leads a command processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeadSelection {
    Primary,
    Secondary,
    /// Both leads: reported separately by `detect`, vote-merged by `trainval`.
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub leads: LeadSelection,
    /// Record ids to process; empty means every record in `data_dir`.
    pub records: Vec<String>,
    pub detector: DetectorConfig,
    pub sst: SstConfig,
    pub trend_cutoff: f64,
    /// Beat matching window for detection scoring, ms.
    pub tolerance_ms: f64,
    pub seed: u64,
    pub folds: usize,
    /// Cross-validate on DS1 before the final fit.
    pub cross_validate: bool,
    /// Replace the fixed classifier parameters with a grid search on DS1.
    pub grid_search: bool,
    /// Require the DS1/DS2 beat counts to match the reference table.
    pub verify_split: bool,
    pub svm_four_class: SvmParams,
    pub svm_binary: SvmParams,
    pub solver: SolverOptions,
    pub knn_k: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            data_dir: PathBuf::from("data"),
            out_dir: PathBuf::from("out"),
            leads: LeadSelection::Primary,
            records: Vec::new(),
            detector: DetectorConfig::default(),
            sst: SstConfig::default(),
            trend_cutoff: DEFAULT_TREND_CUTOFF_HZ,
            tolerance_ms: 150.0,
            seed: 0,
            folds: 10,
            cross_validate: true,
            grid_search: false,
            verify_split: true,
            svm_four_class: SvmParams::new(3.98, 1.98, vec![0.42, 55.0, 0.85, 5.3]),
            svm_binary: SvmParams::new(8.38, 0.52, vec![1.0, 5.0]),
            solver: SolverOptions::default(),
            knn_k: 9,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.detector.validate()?;
        self.sst.validate()?;
        if !(self.tolerance_ms > 0.0) {
            return Err(Error::InvalidInput("tolerance_ms must be positive".into()));
        }
        if self.folds < 2 {
            return Err(Error::InvalidInput("folds must be at least 2".into()));
        }
        if self.knn_k.is_multiple_of(2) {
            return Err(Error::InvalidInput("knn_k must be odd".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form with the input and output
    /// directories blanked, hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut c = self.clone();
        c.data_dir = PathBuf::new();
        c.out_dir = PathBuf::new();
        let json = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }

    /// Sets a dotted key (`detector.beta`, `sst.voices`, `seed`, ...) from its
    /// text form. The value is parsed against the type already at that key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let mut root = serde_json::to_value(&*self)?;
        let mut slot = &mut root;
        for part in key.split('.') {
            slot = slot
                .get_mut(part)
                .ok_or_else(|| Error::InvalidInput(format!("unknown config key '{key}'")))?;
        }
        // An empty list does not say whether it holds numbers or strings.
        let fallback = matches!(slot, Value::Array(a) if a.is_empty()).then(|| text_list(value));
        *slot = parse_like(slot, value).ok_or_else(|| Error::InvalidInput(format!("bad value '{value}' for '{key}'")))?;
        match serde_json::from_value(root.clone()) {
            Ok(c) => *self = c,
            Err(e) => {
                let Some(alt) = fallback else {
                    return Err(Error::InvalidInput(format!("{key} = {value}: {e}")));
                };
                let mut slot = &mut root;
                for part in key.split('.') {
                    slot = slot.get_mut(part).expect("key resolved above");
                }
                *slot = alt;
                *self = serde_json::from_value(root).map_err(|e| Error::InvalidInput(format!("{key} = {value}: {e}")))?;
            }
        }
        Ok(())
    }

    /// Applies a `key = value` file. Blank lines and lines starting with `#`
    /// are ignored.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("{}:{}: expected key = value", path.display(), n + 1)))?;
            self.set(k.trim(), v.trim())
                .map_err(|e| Error::InvalidInput(format!("{}:{}: {e}", path.display(), n + 1)))?;
        }
        Ok(())
    }

    pub fn tolerance_samples(&self, fs: f64) -> usize {
        (self.tolerance_ms * 1e-3 * fs).round() as usize
    }
}

fn text_list(text: &str) -> Value {
    Value::Array(
        text.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| Value::String(s.to_string()))
            .collect(),
    )
}

fn parse_like(current: &Value, text: &str) -> Option<Value> {
    match current {
        Value::Bool(_) => text.parse::<bool>().ok().map(Value::Bool),
        Value::Number(n) if n.is_u64() => text.parse::<u64>().ok().map(Value::from),
        Value::Number(_) => text.parse::<f64>().ok().map(Value::from),
        Value::String(_) => Some(Value::String(text.to_string())),
        Value::Array(items) => {
            let parts: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            let numeric = items.first().map_or(
                parts.iter().all(|p| p.parse::<f64>().is_ok()),
                Value::is_number,
            );
            Some(Value::Array(
                parts
                    .iter()
                    .map(|p| {
                        if numeric {
                            p.parse::<f64>().ok().map(Value::from)
                        } else {
                            Some(Value::String(p.to_string()))
                        }
                    })
                    .collect::<Option<Vec<_>>>()?,
            ))
        }
        _ => None,
    }
}
