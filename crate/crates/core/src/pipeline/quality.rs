use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{LeadSelection, PipelineConfig};
use super::detect::selected_records;
use super::trainval::annotated_features;
use crate::features::BeatFeatures;
use crate::ml::{knn_cross_validate, Dataset, EvalReport};
use crate::wfdb::{map_beat_class, read_record, LeadRole};
use crate::{Error, Result};

pub const QUALITY_LEVELS: [&str; 3] = ["LQ", "MQ", "HQ"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityLabel {
    pub record_id: String,
    pub beat_index: usize,
    pub quality: String,
}

pub fn read_quality_labels(path: &Path) -> Result<Vec<QualityLabel>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        let l: QualityLabel = row?;
        if !QUALITY_LEVELS.contains(&l.quality.as_str()) {
            return Err(Error::InvalidInput(format!(
                "{}: quality '{}' is not one of LQ, MQ, HQ",
                path.display(),
                l.quality
            )));
        }
        out.push(l);
    }
    Ok(out)
}

/// Phase, amplitude and RR features used for quality classification.
pub fn quality_vector(f: &BeatFeatures) -> Vec<f64> {
    vec![f.zeta, f.r_amp, f.rr_prev, f.rr_next, f.rr_mean10]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub config_fingerprint: String,
    pub k: usize,
    pub folds: usize,
    /// Beats per level, in LQ, MQ, HQ order.
    pub counts: Vec<usize>,
    pub report: EvalReport,
}

/// KNN stratified cross-validation of externally supplied beat quality
/// labels. Writes `quality.json`, `confusion_quality.csv` and
/// `quality_predictions.csv`.
pub fn cmd_quality(cfg: &PipelineConfig, labels_path: &Path) -> Result<QualityReport> {
    cfg.validate()?;
    let labels = read_quality_labels(labels_path)?;
    if labels.is_empty() {
        return Err(Error::InvalidInput(format!("{} has no labels", labels_path.display())));
    }
    let wanted: BTreeSet<&str> = labels.iter().map(|l| l.record_id.as_str()).collect();
    let role = match cfg.leads {
        LeadSelection::Secondary => LeadRole::Secondary,
        _ => LeadRole::Primary,
    };
    let mut by_record: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
    for l in &labels {
        by_record.entry(l.record_id.as_str()).or_default().insert(l.beat_index);
    }
    let paths: Vec<_> = selected_records(cfg)?
        .into_iter()
        .filter(|p| p.file_stem().is_some_and(|s| wanted.contains(s.to_string_lossy().as_ref())))
        .collect();
    let features: Vec<BeatFeatures> = paths
        .par_iter()
        .map(|p| {
            let rec = read_record(p)?;
            let keep = by_record.get(rec.record_id.as_str()).cloned().unwrap_or_default();
            annotated_features(cfg, &rec, role, &|a| {
                if keep.contains(&a.sample_index) {
                    map_beat_class(a.symbol)
                } else {
                    None
                }
            })
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let index: BTreeMap<(&str, usize), &BeatFeatures> =
        features.iter().map(|f| ((f.record_id.as_str(), f.beat_index), f)).collect();

    let mut x = Vec::with_capacity(labels.len());
    let mut y = Vec::with_capacity(labels.len());
    let mut unmatched = Vec::new();
    for l in &labels {
        match index.get(&(l.record_id.as_str(), l.beat_index)) {
            Some(f) => {
                x.push(quality_vector(f));
                y.push(QUALITY_LEVELS.iter().position(|q| *q == l.quality).unwrap());
            }
            None => unmatched.push(format!("{}:{}", l.record_id, l.beat_index)),
        }
    }
    if !unmatched.is_empty() {
        let shown: Vec<&str> = unmatched.iter().take(20).map(String::as_str).collect();
        return Err(Error::InvalidInput(format!(
            "{} labelled beats have no feature row: {}{}",
            unmatched.len(),
            shown.join(", "),
            if unmatched.len() > shown.len() { ", ..." } else { "" }
        )));
    }
    let data = Dataset::new(x, y, QUALITY_LEVELS.iter().map(|s| s.to_string()).collect())?;
    let counts = data.class_counts();
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        warn!("all labelled beats share one quality level; the cross-validation is degenerate");
    }
    let (pred, report) = knn_cross_validate(&data, cfg.knn_k, cfg.folds, cfg.seed)?;

    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let mut w = csv::Writer::from_path(cfg.out_dir.join("quality_predictions.csv"))?;
    w.write_record(["record_id", "beat_index", "quality", "predicted"])?;
    for (l, p) in labels.iter().zip(&pred) {
        w.write_record([l.record_id.as_str(), &l.beat_index.to_string(), &l.quality, QUALITY_LEVELS[*p]])?;
    }
    w.flush().map_err(|e| Error::io(&cfg.out_dir, e))?;
    report.write_confusion_csv(&cfg.out_dir.join("confusion_quality.csv"))?;
    let out = QualityReport {
        config_fingerprint: cfg.fingerprint(),
        k: cfg.knn_k,
        folds: cfg.folds,
        counts,
        report,
    };
    let path = cfg.out_dir.join("quality.json");
    let f = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::to_writer_pretty(f, &out)?;
    Ok(out)
}
