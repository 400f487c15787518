use std::collections::BTreeMap;
use std::path::Path;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{LeadSelection, PipelineConfig};
use super::detect::{record_name, role_name, roles, selected_records};
use super::lead::analyze_lead;
use crate::features::{beat_features, write_features_csv, BeatFeatures, LeadContext};
use crate::ml::{
    cross_validate, evaluate, grid_search_cv, svm_train, Dataset, EvalReport, ParamGrid, SvmModel, SvmParams,
};
use crate::wfdb::{map_beat_class, read_record, split_ds, AamiClass, DatasetSplit, EcgRecord, LeadRole};
use crate::{Error, Result};

pub const FOUR_CLASSES: [AamiClass; 4] = [AamiClass::N, AamiClass::S, AamiClass::V, AamiClass::F];

/// Six features at the annotated beats of one lead. Every annotated beat
/// contributes to the RR intervals; rows are produced for beats whose AAMI
/// class is in `keep`.
pub fn annotated_features(cfg: &PipelineConfig, rec: &EcgRecord, role: LeadRole, keep: &dyn Fn(&crate::wfdb::Annotation) -> Option<AamiClass>) -> Result<Vec<BeatFeatures>> {
    let idx = rec
        .lead_index(role)
        .ok_or_else(|| Error::InvalidInput(format!("{} has no {} lead", rec.record_id, role_name(role))))?;
    let a = analyze_lead(&rec.leads[idx].samples, rec.fs, &cfg.detector, &cfg.sst, cfg.trend_cutoff)?;
    let beats: Vec<_> = rec.beats().collect();
    let peaks: Vec<usize> = beats.iter().map(|b| b.sample_index).collect();
    let labels: Vec<Option<AamiClass>> = beats.iter().map(|b| keep(b)).collect();
    let ctx = LeadContext {
        record_id: &rec.record_id,
        fs: rec.fs,
        ecg: &a.ecg,
        phase: &a.sst.estimate,
        trace: &a.trace,
    };
    Ok(beat_features(&ctx, &peaks, &labels))
}

fn four_class_label(a: &crate::wfdb::Annotation) -> Option<AamiClass> {
    map_beat_class(a.symbol).filter(|c| FOUR_CLASSES.contains(c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// N versus S, V and F pooled.
    Binary,
    FourClass,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Binary => "binary",
            Task::FourClass => "four_class",
        }
    }

    pub fn classes(self) -> Vec<String> {
        match self {
            Task::Binary => vec!["N".into(), "abnormal".into()],
            Task::FourClass => FOUR_CLASSES.iter().map(|c| c.to_string()).collect(),
        }
    }

    fn label(self, c: AamiClass) -> usize {
        let four = FOUR_CLASSES.iter().position(|&k| k == c).expect("four-class label");
        match self {
            Task::Binary => usize::from(four > 0),
            Task::FourClass => four,
        }
    }

    fn params(self, cfg: &PipelineConfig) -> &SvmParams {
        match self {
            Task::Binary => &cfg.svm_binary,
            Task::FourClass => &cfg.svm_four_class,
        }
    }

    fn grid(self) -> ParamGrid {
        match self {
            Task::Binary => ParamGrid::binary(),
            Task::FourClass => ParamGrid::four_class(),
        }
    }
}

pub fn to_dataset(rows: &[BeatFeatures], task: Task) -> Result<Dataset> {
    Dataset::new(
        rows.iter().map(|r| r.vector().to_vec()).collect(),
        rows.iter().map(|r| task.label(r.label.expect("labelled row"))).collect(),
        task.classes(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub folds: usize,
    pub mean_balanced_accuracy: f64,
    pub fold_balanced_accuracy: Vec<f64>,
    /// Mean balanced accuracy of every grid point when searching.
    pub grid: Vec<(SvmParams, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub task: Task,
    /// `primary`, `secondary` or `merged`.
    pub lead: String,
    pub params: SvmParams,
    pub train_beats: usize,
    pub cv: Option<CvSummary>,
    pub test: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainValReport {
    pub config_fingerprint: String,
    pub split: DatasetSplit,
    /// DS1 and DS2 rows per lead.
    pub beats: BTreeMap<String, (usize, usize)>,
    pub tasks: Vec<TaskReport>,
}

struct LeadData {
    role: LeadRole,
    ds1: Vec<BeatFeatures>,
    ds2: Vec<BeatFeatures>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer_pretty(f, value)?;
    Ok(())
}

/// Builds DS1/DS2, extracts features at the annotated beats, optionally
/// cross-validates (or grid-searches) on DS1, fits the binary and four-class
/// machines on DS1 and evaluates them on DS2. With both leads selected the
/// per-lead machines are also combined by pooling their votes.
pub fn cmd_trainval(cfg: &PipelineConfig) -> Result<TrainValReport> {
    cfg.validate()?;
    let paths = selected_records(cfg)?;
    let records: Vec<EcgRecord> = paths
        .par_iter()
        .map(|p| {
            let rec = read_record(p)?;
            if rec.annotations.is_empty() {
                return Err(Error::InvalidInput(format!("record {} has no annotations", record_name(p))));
            }
            Ok(rec)
        })
        .collect::<Result<_>>()?;
    let split = if cfg.verify_split {
        split_ds(&records.iter().map(EcgRecord::summary).collect::<Vec<_>>())?
    } else {
        DatasetSplit::literature()
    };
    let in_set = |ids: &[String], r: &EcgRecord| ids.contains(&r.record_id);
    if !records.iter().any(|r| in_set(&split.ds1_records, r)) || !records.iter().any(|r| in_set(&split.ds2_records, r)) {
        return Err(Error::InvalidInput("need records from both DS1 and DS2".into()));
    }
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;

    let mut leads = Vec::new();
    for role in roles(cfg.leads) {
        let per_record: Vec<(bool, Vec<BeatFeatures>)> = records
            .par_iter()
            .filter(|r| in_set(&split.ds1_records, r) || in_set(&split.ds2_records, r))
            .map(|r| Ok((in_set(&split.ds1_records, r), annotated_features(cfg, r, role, &four_class_label)?)))
            .collect::<Result<_>>()?;
        let mut data = LeadData { role, ds1: Vec::new(), ds2: Vec::new() };
        for (train, rows) in per_record {
            if train {
                data.ds1.extend(rows);
            } else {
                data.ds2.extend(rows);
            }
        }
        let all: Vec<BeatFeatures> = data.ds1.iter().chain(&data.ds2).cloned().collect();
        write_features_csv(&cfg.out_dir.join(format!("features_{}.csv", role_name(role))), &all)?;
        info!("{} lead: {} DS1 and {} DS2 beats", role_name(role), data.ds1.len(), data.ds2.len());
        leads.push(data);
    }

    let mut tasks = Vec::new();
    for task in [Task::Binary, Task::FourClass] {
        let mut models = Vec::new();
        for lead in &leads {
            let train = to_dataset(&lead.ds1, task)?;
            let test = to_dataset(&lead.ds2, task)?;
            let (params, cv) = select_params(cfg, task, &train)?;
            let model = svm_train(&train, &params, &cfg.solver)?;
            model.save_json(&cfg.out_dir.join(format!("model_{}_{}.json", task.name(), role_name(lead.role))))?;
            let pred = model.predict_all(&test.x)?;
            let report = evaluate(&pred, &test.y, &test.classes)?;
            info!("{} / {}: DS2 accuracy {:.2}%", task.name(), role_name(lead.role), 100.0 * report.acc);
            tasks.push(TaskReport {
                task,
                lead: role_name(lead.role).to_string(),
                params,
                train_beats: train.len(),
                cv,
                test: report,
            });
            models.push(model);
        }
        if cfg.leads == LeadSelection::Both {
            let report = merged_evaluation(&leads, &models, task)?;
            info!("{} / merged: DS2 accuracy {:.2}%", task.name(), 100.0 * report.acc);
            tasks.push(TaskReport {
                task,
                lead: "merged".into(),
                params: task.params(cfg).clone(),
                train_beats: leads[0].ds1.len().min(leads[1].ds1.len()),
                cv: None,
                test: report,
            });
        }
    }
    for t in &tasks {
        t.test.write_confusion_csv(&cfg.out_dir.join(format!("confusion_{}_{}.csv", t.task.name(), t.lead)))?;
    }
    let report = TrainValReport {
        config_fingerprint: cfg.fingerprint(),
        split,
        beats: leads
            .iter()
            .map(|l| (role_name(l.role).to_string(), (l.ds1.len(), l.ds2.len())))
            .collect(),
        tasks,
    };
    write_json(&cfg.out_dir.join("trainval.json"), &report)?;
    Ok(report)
}

fn select_params(cfg: &PipelineConfig, task: Task, train: &Dataset) -> Result<(SvmParams, Option<CvSummary>)> {
    if cfg.grid_search {
        let g = grid_search_cv(train, &task.grid().expand(), &cfg.solver, cfg.folds, cfg.seed)?;
        return Ok((
            g.best.clone(),
            Some(CvSummary {
                folds: cfg.folds,
                mean_balanced_accuracy: g.best_score,
                fold_balanced_accuracy: Vec::new(),
                grid: g.results,
            }),
        ));
    }
    let params = task.params(cfg).clone();
    if !cfg.cross_validate {
        return Ok((params, None));
    }
    let cv = cross_validate(train, &params, &cfg.solver, cfg.folds, cfg.seed)?;
    Ok((
        params,
        Some(CvSummary {
            folds: cfg.folds,
            mean_balanced_accuracy: cv.mean_balanced_accuracy,
            fold_balanced_accuracy: cv.fold_balanced_accuracy,
            grid: Vec::new(),
        }),
    ))
}

/// DS2 beats present in both leads, classified by the pooled votes of the
/// two per-lead machines.
fn merged_evaluation(leads: &[LeadData], models: &[SvmModel], task: Task) -> Result<EvalReport> {
    let key = |r: &BeatFeatures| (r.record_id.clone(), r.beat_index);
    let second: BTreeMap<_, &BeatFeatures> = leads[1].ds2.iter().map(|r| (key(r), r)).collect();
    let mut pred = Vec::new();
    let mut refs = Vec::new();
    for a in &leads[0].ds2 {
        if let Some(b) = second.get(&key(a)) {
            let (xa, xb) = (a.vector(), b.vector());
            pred.push(SvmModel::predict_merged(&[(&models[0], &xa), (&models[1], &xb)])?);
            refs.push(task.label(a.label.expect("labelled row")));
        }
    }
    evaluate(&pred, &refs, &task.classes())
}
