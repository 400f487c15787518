use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::metrics::{evaluate, EvalReport};
use super::svm::{svm_train, SolverOptions, SvmParams};
use crate::{Error, Result};

/// Fold index for every sample. Each class is shuffled with `seed` and dealt
/// round-robin, continuing where the previous class stopped, so every fold
/// holds `floor` or `ceil` of each class's share.
pub fn stratified_folds(y: &[usize], classes: &[String], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::Stratification(format!("need at least 2 folds, got {k}")));
    }
    let mut by_class = vec![Vec::new(); classes.len()];
    for (i, &c) in y.iter().enumerate() {
        by_class[c].push(i);
    }
    if let Some((c, m)) = by_class.iter().enumerate().find(|(_, m)| !m.is_empty() && m.len() < k) {
        return Err(Error::Stratification(format!(
            "class {} has {} samples, fewer than {k} folds",
            classes[c],
            m.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; y.len()];
    let mut next = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            fold[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(fold)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub fold_balanced_accuracy: Vec<f64>,
    pub mean_balanced_accuracy: f64,
    /// Out-of-fold predictions of all folds pooled.
    pub pooled: EvalReport,
}

pub fn cross_validate(data: &Dataset, params: &SvmParams, opts: &SolverOptions, k: usize, seed: u64) -> Result<CvResult> {
    let fold = stratified_folds(&data.y, &data.classes, k, seed)?;
    let outcomes = (0..k)
        .into_par_iter()
        .map(|f| {
            let train: Vec<usize> = (0..data.len()).filter(|&i| fold[i] != f).collect();
            let test: Vec<usize> = (0..data.len()).filter(|&i| fold[i] == f).collect();
            let model = svm_train(&data.subset(&train), params, opts)?;
            let pred = test.iter().map(|&i| model.predict(&data.x[i])).collect::<Result<Vec<_>>>()?;
            Ok((test, pred))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut all_pred = vec![0; data.len()];
    let mut scores = Vec::with_capacity(k);
    for (test, pred) in &outcomes {
        let refs: Vec<usize> = test.iter().map(|&i| data.y[i]).collect();
        scores.push(evaluate(pred, &refs, &data.classes)?.balanced_accuracy());
        for (&i, &p) in test.iter().zip(pred) {
            all_pred[i] = p;
        }
    }
    Ok(CvResult {
        mean_balanced_accuracy: scores.iter().sum::<f64>() / k as f64,
        fold_balanced_accuracy: scores,
        pooled: evaluate(&all_pred, &data.y, &data.classes)?,
    })
}

/// Cartesian product of C, gamma and class-weight vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub c: Vec<f64>,
    pub gamma: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
}

impl ParamGrid {
    /// N, S, V, F machine; contains C = 3.98, gamma = 1.98,
    /// w = (0.42, 55, 0.85, 5.3).
    pub fn four_class() -> Self {
        ParamGrid {
            c: vec![1.0, 3.98, 8.38],
            gamma: vec![0.52, 1.98],
            weights: vec![vec![1.0; 4], vec![0.42, 55.0, 0.85, 5.3]],
        }
    }

    /// N versus abnormal; contains C = 8.38, gamma = 0.52, w = (1, 5).
    pub fn binary() -> Self {
        ParamGrid {
            c: vec![1.0, 3.98, 8.38],
            gamma: vec![0.52, 1.98],
            weights: vec![vec![1.0, 1.0], vec![1.0, 5.0]],
        }
    }

    pub fn expand(&self) -> Vec<SvmParams> {
        let mut out = Vec::new();
        for &c in &self.c {
            for &g in &self.gamma {
                for w in &self.weights {
                    out.push(SvmParams::new(c, g, w.clone()));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearch {
    pub best: SvmParams,
    pub best_score: f64,
    /// Mean balanced accuracy for every grid point, in grid order.
    pub results: Vec<(SvmParams, f64)>,
}

/// Picks the grid point with the highest mean balanced accuracy over `k`
/// stratified folds; ties keep the earlier point.
pub fn grid_search_cv(data: &Dataset, grid: &[SvmParams], opts: &SolverOptions, k: usize, seed: u64) -> Result<GridSearch> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty parameter grid".into()));
    }
    let mut results = Vec::with_capacity(grid.len());
    for p in grid {
        let cv = cross_validate(data, p, opts, k, seed)?;
        log::info!(
            "C={} gamma={} w={:?}: balanced accuracy {:.4}",
            p.c,
            p.gamma,
            p.class_weights,
            cv.mean_balanced_accuracy
        );
        results.push((p.clone(), cv.mean_balanced_accuracy));
    }
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.1 > results[best].1 {
            best = i;
        }
    }
    Ok(GridSearch {
        best: results[best].0.clone(),
        best_score: results[best].1,
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn folds_preserve_proportions() {
        let y: Vec<usize> = (0..1000).map(|i| if i % 10 == 0 { 1 } else if i % 10 < 4 { 2 } else { 0 }).collect();
        let fold = stratified_folds(&y, &names(3), 10, 7).unwrap();
        for f in 0..10 {
            for c in 0..3 {
                let n = (0..y.len()).filter(|&i| fold[i] == f && y[i] == c).count();
                let share = y.iter().filter(|&&v| v == c).count() as f64 / 10.0;
                assert!((n as f64 - share).abs() <= 1.0, "fold {f} class {c}: {n} vs {share}");
            }
        }
        assert_eq!(fold, stratified_folds(&y, &names(3), 10, 7).unwrap());
        assert_ne!(fold, stratified_folds(&y, &names(3), 10, 8).unwrap());
    }

    #[test]
    fn small_class_is_rejected() {
        let mut y = vec![0; 100];
        y[3] = 1;
        y[9] = 1;
        let err = stratified_folds(&y, &names(2), 10, 0).unwrap_err();
        assert!(err.to_string().contains("c1"), "{err}");
        assert!(stratified_folds(&y, &names(2), 1, 0).is_err());
        assert!(stratified_folds(&y, &names(2), 2, 0).is_ok());
    }

    #[test]
    fn grid_contains_published_points() {
        let four = ParamGrid::four_class().expand();
        assert!(four
            .iter()
            .any(|p| p.c == 3.98 && p.gamma == 1.98 && p.class_weights == vec![0.42, 55.0, 0.85, 5.3]));
        let bin = ParamGrid::binary().expand();
        assert!(bin.iter().any(|p| p.c == 8.38 && p.gamma == 0.52 && p.class_weights == vec![1.0, 5.0]));
    }
}
