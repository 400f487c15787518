use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Confusion matrix with references on rows and predictions on columns.
/// Labels outside `classes` land in a trailing "other" row/column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classes: Vec<String>,
    /// `(k + 1) x (k + 1)`; index `k` is the unseen-label bucket.
    pub confusion: Vec<Vec<u64>>,
    pub unseen: u64,
    /// `n_ii / sum_k n_ik`, `None` for classes absent from the references.
    pub se: Vec<Option<f64>>,
    /// `n_ii / sum_k n_ki`, `None` for classes never predicted.
    pub ppv: Vec<Option<f64>>,
    pub acc: f64,
    pub total: u64,
}

impl EvalReport {
    /// Builds the report from a `k x k` (or `(k+1) x (k+1)`) count matrix.
    pub fn from_confusion(classes: Vec<String>, counts: &[Vec<u64>]) -> Result<Self> {
        let k = classes.len();
        let m = counts.len();
        if !(m == k || m == k + 1) || counts.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidInput(format!("confusion must be {k}x{k} or {}x{}", k + 1, k + 1)));
        }
        let mut confusion = vec![vec![0u64; k + 1]; k + 1];
        for (i, row) in counts.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                confusion[i][j] = *v;
            }
        }
        let total: u64 = confusion.iter().flatten().sum();
        let unseen = confusion[k].iter().sum::<u64>() + (0..k).map(|i| confusion[i][k]).sum::<u64>();
        let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
        let se = (0..k).map(|i| ratio(confusion[i][i], confusion[i].iter().sum())).collect();
        let ppv = (0..k)
            .map(|j| ratio(confusion[j][j], (0..=k).map(|i| confusion[i][j]).sum()))
            .collect();
        let trace: u64 = (0..k).map(|i| confusion[i][i]).sum();
        Ok(EvalReport {
            classes,
            confusion,
            unseen,
            se,
            ppv,
            acc: if total > 0 { trace as f64 / total as f64 } else { 0.0 },
            total,
        })
    }

    /// Mean sensitivity over classes present in the references.
    pub fn balanced_accuracy(&self) -> f64 {
        let s: Vec<f64> = self.se.iter().flatten().copied().collect();
        if s.is_empty() {
            0.0
        } else {
            s.iter().sum::<f64>() / s.len() as f64
        }
    }

    pub fn row_total(&self, i: usize) -> u64 {
        self.confusion[i].iter().sum()
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }

    /// Confusion as CSV: header `reference,<classes...>[,other]`.
    pub fn write_confusion_csv(&self, path: &Path) -> Result<()> {
        let k = self.classes.len();
        let with_other = self.unseen > 0;
        let n = if with_other { k + 1 } else { k };
        let name = |i: usize| if i < k { self.classes[i].clone() } else { "other".to_string() };
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["reference".to_string()];
        header.extend((0..n).map(name));
        w.write_record(&header)?;
        for i in 0..n {
            let mut rec = vec![name(i)];
            rec.extend((0..n).map(|j| self.confusion[i][j].to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Tallies predictions against references over `classes.len()` labels.
pub fn evaluate(predictions: &[usize], references: &[usize], classes: &[String]) -> Result<EvalReport> {
    if predictions.len() != references.len() {
        return Err(Error::InvalidInput(format!(
            "{} predictions for {} references",
            predictions.len(),
            references.len()
        )));
    }
    let k = classes.len();
    let mut counts = vec![vec![0u64; k + 1]; k + 1];
    for (&p, &r) in predictions.iter().zip(references) {
        counts[r.min(k)][p.min(k)] += 1;
    }
    EvalReport::from_confusion(classes.to_vec(), &counts)
}
