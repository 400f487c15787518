use rayon::prelude::*;

use super::cv::stratified_folds;
use super::dataset::{Dataset, Standardizer};
use super::metrics::{evaluate, EvalReport};
use crate::{Error, Result};

/// k-nearest-neighbour classifier on z-scored features.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub k: usize,
    pub standardizer: Standardizer,
    pub exemplars: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub n_classes: usize,
}

impl KnnModel {
    pub fn fit(data: &Dataset, k: usize) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Training("empty training set".into()));
        }
        if k == 0 || k.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("k must be odd, got {k}")));
        }
        if k > data.len() {
            return Err(Error::Training(format!("k = {k} exceeds {} exemplars", data.len())));
        }
        let standardizer = Standardizer::fit(&data.x);
        Ok(KnnModel {
            k,
            exemplars: standardizer.apply_all(&data.x),
            standardizer,
            labels: data.y.clone(),
            n_classes: data.classes.len(),
        })
    }

    /// Majority label of the k nearest exemplars; a tie goes to the tied
    /// class with the closest member.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.standardizer.mean.len() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("query row has wrong length or non-finite values".into()));
        }
        let z = self.standardizer.apply(x);
        let mut d: Vec<(f64, usize)> = self
            .exemplars
            .iter()
            .enumerate()
            .map(|(i, e)| (e.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        let k = self.k;
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        d.select_nth_unstable_by(k - 1, cmp);
        let near = &mut d[..k];
        near.sort_by(cmp);
        let mut counts = vec![0usize; self.n_classes];
        for &(_, i) in near.iter() {
            counts[self.labels[i]] += 1;
        }
        let top = *counts.iter().max().unwrap();
        // Nearest-first scan: first label with the top count wins.
        Ok(near.iter().map(|&(_, i)| self.labels[i]).find(|&l| counts[l] == top).unwrap())
    }

    pub fn predict_all(&self, x: &[Vec<f64>]) -> Result<Vec<usize>> {
        x.par_iter().map(|r| self.predict(r)).collect()
    }
}

pub fn knn_fit_predict(train: &Dataset, test: &[Vec<f64>], k: usize) -> Result<Vec<usize>> {
    KnnModel::fit(train, k)?.predict_all(test)
}

/// Stratified k-fold cross-validation; returns the out-of-fold prediction of
/// every sample and the pooled report.
pub fn knn_cross_validate(data: &Dataset, k: usize, folds: usize, seed: u64) -> Result<(Vec<usize>, EvalReport)> {
    let fold = stratified_folds(&data.y, &data.classes, folds, seed)?;
    let mut pred = vec![0; data.len()];
    for f in 0..folds {
        let train: Vec<usize> = (0..data.len()).filter(|&i| fold[i] != f).collect();
        let test: Vec<usize> = (0..data.len()).filter(|&i| fold[i] == f).collect();
        let model = KnnModel::fit(&data.subset(&train), k)?;
        let rows: Vec<Vec<f64>> = test.iter().map(|&i| data.x[i].clone()).collect();
        for (&i, p) in test.iter().zip(model.predict_all(&rows)?) {
            pred[i] = p;
        }
    }
    let report = evaluate(&pred, &data.y, &data.classes)?;
    Ok((pred, report))
}
