use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Standardizer};
use super::kernel::{rbf, RbfGram};
use super::smo::{self, SmoOptions};
use crate::{Error, Result};

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: f64,
    /// Multiplier on `c` per class; empty means all ones.
    pub class_weights: Vec<f64>,
}

impl SvmParams {
    pub fn new(c: f64, gamma: f64, class_weights: Vec<f64>) -> Self {
        SvmParams { c, gamma, class_weights }
    }

    pub fn weight(&self, class: usize) -> f64 {
        self.class_weights.get(class).copied().unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub eps: f64,
    pub cache_mb: usize,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            eps: 1e-3,
            cache_mb: 256,
            max_iter: 10_000_000,
        }
    }
}

/// Binary machine for one class pair; positive decision votes for `pos`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairModel {
    pub pos: usize,
    pub neg: usize,
    /// Standardized support vectors.
    pub support: Vec<Vec<f64>>,
    /// `y_i alpha_i` per support vector.
    pub coef: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub gap: f64,
}

impl PairModel {
    pub fn decision(&self, z: &[f64], gamma: f64) -> f64 {
        self.support
            .iter()
            .zip(&self.coef)
            .map(|(sv, a)| a * rbf(sv, z, gamma))
            .sum::<f64>()
            - self.rho
    }
}

/// One-vs-one votes; `strength` sums |decision| of the pairs each class won.
#[derive(Debug, Clone, PartialEq)]
pub struct Votes {
    pub counts: Vec<u32>,
    pub strength: Vec<f64>,
}

impl Votes {
    pub fn new(n_classes: usize) -> Self {
        Votes {
            counts: vec![0; n_classes],
            strength: vec![0.0; n_classes],
        }
    }

    pub fn merge(&mut self, other: &Votes) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for (a, b) in self.strength.iter_mut().zip(&other.strength) {
            *a += b;
        }
    }

    /// Most votes, then largest strength, then lowest index.
    pub fn winner(&self) -> usize {
        let mut best = 0;
        for k in 1..self.counts.len() {
            let better = self.counts[k] > self.counts[best]
                || (self.counts[k] == self.counts[best] && self.strength[k] > self.strength[best]);
            if better {
                best = k;
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub version: u32,
    pub classes: Vec<String>,
    pub params: SvmParams,
    pub standardizer: Standardizer,
    pub pairs: Vec<PairModel>,
}

impl SvmModel {
    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.standardizer.mean.len() {
            return Err(Error::InvalidInput(format!(
                "feature row has {} values, model expects {}",
                x.len(),
                self.standardizer.mean.len()
            )));
        }
        if let Some(j) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("feature {j} is not finite")));
        }
        Ok(())
    }

    /// Decision value of every pair, in `pairs` order.
    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let z = self.standardizer.apply(x);
        Ok(self.pairs.iter().map(|p| p.decision(&z, self.params.gamma)).collect())
    }

    pub fn votes(&self, x: &[f64]) -> Result<Votes> {
        let d = self.decision_values(x)?;
        let mut v = Votes::new(self.classes.len());
        for (p, d) in self.pairs.iter().zip(d) {
            let k = if d > 0.0 { p.pos } else { p.neg };
            v.counts[k] += 1;
            v.strength[k] += d.abs();
        }
        Ok(v)
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(self.votes(x)?.winner())
    }

    pub fn predict_all(&self, x: &[Vec<f64>]) -> Result<Vec<usize>> {
        x.par_iter().map(|r| self.predict(r)).collect()
    }

    /// Pools the votes of per-lead models and returns the most common class.
    pub fn predict_merged(models: &[(&SvmModel, &[f64])]) -> Result<usize> {
        let n = models
            .first()
            .map(|(m, _)| m.classes.len())
            .ok_or_else(|| Error::InvalidInput("no models to merge".into()))?;
        let mut pooled = Votes::new(n);
        for (m, x) in models {
            if m.classes.len() != n {
                return Err(Error::InvalidInput("merged models disagree on classes".into()));
            }
            pooled.merge(&m.votes(x)?);
        }
        Ok(pooled.winner())
    }

    pub fn support_count(&self) -> usize {
        self.pairs.iter().map(|p| p.support.len()).sum()
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(std::io::BufWriter::new(f), self)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let m: SvmModel = serde_json::from_reader(std::io::BufReader::new(f))?;
        if m.version != MODEL_VERSION {
            return Err(Error::InvalidInput(format!(
                "{}: model version {} (expected {MODEL_VERSION})",
                path.display(),
                m.version
            )));
        }
        Ok(m)
    }
}

/// Trains one weighted soft-margin machine per pair of classes present in
/// `data`, after z-scoring features with the training statistics.
pub fn svm_train(data: &Dataset, params: &SvmParams, opts: &SolverOptions) -> Result<SvmModel> {
    if !(params.c > 0.0) || !(params.gamma > 0.0) {
        return Err(Error::InvalidInput(format!("C = {} and gamma = {} must be positive", params.c, params.gamma)));
    }
    if params.class_weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InvalidInput("class weights must be positive".into()));
    }
    let counts = data.class_counts();
    if let Some(k) = (0..counts.len()).find(|&k| counts[k] == 1) {
        return Err(Error::Training(format!("class {} has a single sample", data.classes[k])));
    }
    let present: Vec<usize> = (0..counts.len()).filter(|&k| counts[k] > 0).collect();
    if present.len() < 2 {
        return Err(Error::Training("at least two classes are needed".into()));
    }
    let standardizer = Standardizer::fit(&data.x);
    let z = standardizer.apply_all(&data.x);
    let mut jobs = Vec::new();
    for (a, &p) in present.iter().enumerate() {
        for &q in &present[a + 1..] {
            jobs.push((p, q));
        }
    }
    let smo_opts = SmoOptions {
        eps: opts.eps,
        cache_bytes: (opts.cache_mb << 20) / jobs.len(),
        max_iter: opts.max_iter,
    };
    let pairs = jobs
        .par_iter()
        .map(|&(p, q)| train_pair(&z, &data.y, p, q, params, &smo_opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(SvmModel {
        version: MODEL_VERSION,
        classes: data.classes.clone(),
        params: params.clone(),
        standardizer,
        pairs,
    })
}

fn train_pair(z: &[Vec<f64>], labels: &[usize], pos: usize, neg: usize, params: &SvmParams, opts: &SmoOptions) -> Result<PairModel> {
    let idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == pos || labels[i] == neg).collect();
    let x: Vec<Vec<f64>> = idx.iter().map(|&i| z[i].clone()).collect();
    let y: Vec<f64> = idx.iter().map(|&i| if labels[i] == pos { 1.0 } else { -1.0 }).collect();
    let c: Vec<f64> = idx.iter().map(|&i| params.c * params.weight(labels[i])).collect();
    let sol = smo::solve(&RbfGram { x: &x, gamma: params.gamma }, &y, &c, opts)?;
    if !sol.converged {
        return Err(Error::Convergence(format!(
            "class pair {pos}/{neg}: violation {:.3e} after {} iterations",
            sol.gap, sol.iterations
        )));
    }
    let mut support = Vec::new();
    let mut coef = Vec::new();
    for (t, a) in sol.alpha.iter().enumerate() {
        if *a > 0.0 {
            support.push(x[t].clone());
            coef.push(y[t] * a);
        }
    }
    Ok(PairModel {
        pos,
        neg,
        support,
        coef,
        rho: sol.rho,
        iterations: sol.iterations,
        gap: sol.gap,
    })
}
