use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{LeadSelection, PipelineConfig};
use super::lead::analyze_lead;
use crate::rpeak::{score_detection, DetectionScore};
use crate::wfdb::{list_records, read_record, EcgRecord, LeadRole};
use crate::{Error, Result};

/// A record that could not be processed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub record: String,
    pub reason: String,
}

/// Header paths selected by the configuration, in record order.
pub fn selected_records(cfg: &PipelineConfig) -> Result<Vec<PathBuf>> {
    let all = list_records(&cfg.data_dir)?;
    let chosen: Vec<PathBuf> = all
        .into_iter()
        .filter(|p| cfg.records.is_empty() || cfg.records.iter().any(|r| p.file_stem().is_some_and(|s| s == r.as_str())))
        .collect();
    if chosen.is_empty() {
        return Err(Error::InvalidInput(format!("no records found in {}", cfg.data_dir.display())));
    }
    Ok(chosen)
}

pub(crate) fn record_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub(crate) fn roles(sel: LeadSelection) -> Vec<LeadRole> {
    match sel {
        LeadSelection::Primary => vec![LeadRole::Primary],
        LeadSelection::Secondary => vec![LeadRole::Secondary],
        LeadSelection::Both => vec![LeadRole::Primary, LeadRole::Secondary],
    }
}

pub(crate) fn role_name(role: LeadRole) -> &'static str {
    match role {
        LeadRole::Primary => "primary",
        LeadRole::Secondary => "secondary",
    }
}

/// TP/FN/FP with Se and +P in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    #[serde(rename = "TP")]
    pub tp: usize,
    #[serde(rename = "FN")]
    pub fn_: usize,
    #[serde(rename = "FP")]
    pub fp: usize,
    #[serde(rename = "Se")]
    pub se: f64,
    #[serde(rename = "PPV")]
    pub ppv: f64,
}

impl From<&DetectionScore> for ScoreRow {
    fn from(s: &DetectionScore) -> Self {
        ScoreRow {
            tp: s.tp,
            fn_: s.fn_,
            fp: s.fp,
            se: 100.0 * s.se(),
            ppv: 100.0 * s.ppv(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordDetection {
    pub record: String,
    pub lead_name: String,
    pub base: ScoreRow,
    pub recovery: ScoreRow,
    pub inserted: usize,
    pub inverted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadDetection {
    pub lead: String,
    pub base: ScoreRow,
    pub recovery: ScoreRow,
    pub records: Vec<RecordDetection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectReport {
    pub config_fingerprint: String,
    pub tolerance_ms: f64,
    pub leads: Vec<LeadDetection>,
    pub skipped: Vec<Skipped>,
}

fn detect_one(cfg: &PipelineConfig, rec: &EcgRecord, role: LeadRole, peaks_dir: &Path) -> Result<Option<(RecordDetection, DetectionScore, DetectionScore)>> {
    let Some(idx) = rec.lead_index(role) else {
        return Ok(None);
    };
    let lead = &rec.leads[idx];
    let a = analyze_lead(&lead.samples, rec.fs, &cfg.detector, &cfg.sst, cfg.trend_cutoff)?;
    let reference = rec.beat_indices();
    let tol = cfg.tolerance_samples(rec.fs);
    let base = score_detection(&a.base.indices, &reference, tol);
    let recovered = score_detection(&a.recovered.indices, &reference, tol);
    let path = peaks_dir.join(format!("{}_{}.csv", rec.record_id, role_name(role)));
    a.recovered.write_csv(&path, rec.fs)?;
    Ok(Some((
        RecordDetection {
            record: rec.record_id.clone(),
            lead_name: lead.name.clone(),
            base: (&base).into(),
            recovery: (&recovered).into(),
            inserted: a.recovery.inserted,
            inverted: a.recovery.inverted,
        },
        base,
        recovered,
    )))
}

/// Runs detection, the refractory filter, the SST and beat recovery on every
/// selected record and lead; writes `peaks/<record>_<lead>.csv` and
/// `detect.json` under the output directory.
pub fn cmd_detect(cfg: &PipelineConfig) -> Result<DetectReport> {
    cfg.validate()?;
    let records = selected_records(cfg)?;
    let peaks_dir = cfg.out_dir.join("peaks");
    std::fs::create_dir_all(&peaks_dir).map_err(|e| Error::io(&peaks_dir, e))?;
    let roles = roles(cfg.leads);

    type Outcome = std::result::Result<Vec<Option<(RecordDetection, DetectionScore, DetectionScore)>>, Skipped>;
    let outcomes: Vec<Outcome> = records
        .par_iter()
        .map(|path| {
            let name = record_name(path);
            let run = || -> Result<_> {
                let rec = read_record(path)?;
                if rec.annotations.is_empty() {
                    return Err(Error::InvalidInput("no reference annotations".into()));
                }
                roles.iter().map(|&r| detect_one(cfg, &rec, r, &peaks_dir)).collect::<Result<Vec<_>>>()
            };
            run().map_err(|e| {
                warn!("skipping {name}: {e}");
                Skipped { record: name.clone(), reason: e.to_string() }
            })
        })
        .collect();

    let mut leads: Vec<LeadDetection> = roles
        .iter()
        .map(|&r| LeadDetection {
            lead: role_name(r).to_string(),
            base: (&DetectionScore::default()).into(),
            recovery: (&DetectionScore::default()).into(),
            records: Vec::new(),
        })
        .collect();
    let mut totals = vec![(DetectionScore::default(), DetectionScore::default()); roles.len()];
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            Ok(per_lead) => {
                for (k, item) in per_lead.into_iter().enumerate() {
                    if let Some((row, b, r)) = item {
                        totals[k].0.add(&b);
                        totals[k].1.add(&r);
                        leads[k].records.push(row);
                    }
                }
            }
            Err(s) => skipped.push(s),
        }
    }
    for (l, (b, r)) in leads.iter_mut().zip(&totals) {
        l.base = b.into();
        l.recovery = r.into();
        info!(
            "{} lead: base Se {:.2} +P {:.2}, with recovery Se {:.2} +P {:.2}",
            l.lead, l.base.se, l.base.ppv, l.recovery.se, l.recovery.ppv
        );
    }
    let report = DetectReport {
        config_fingerprint: cfg.fingerprint(),
        tolerance_ms: cfg.tolerance_ms,
        leads,
        skipped,
    };
    let path = cfg.out_dir.join("detect.json");
    let f = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::to_writer_pretty(f, &report)?;
    Ok(report)
}
