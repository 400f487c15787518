//! Two-variable SMO for the soft-margin dual
//!
//! ```text
//! min  1/2 a'Qa - e'a   s.t.  0 <= a_i <= C_i,  y'a = 0,   Q_ij = y_i y_j K_ij
//! ```
//!
//! with maximal-violating-pair working sets and no shrinking.

use std::num::NonZeroUsize;

use log::warn;
use lru::LruCache;

use super::kernel::Gram;
use crate::{Error, Result};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoOptions {
    /// Stop when the maximal violation `m(a) - M(a)` drops below this.
    pub eps: f64,
    pub cache_bytes: usize,
    pub max_iter: usize,
}

impl Default for SmoOptions {
    fn default() -> Self {
        SmoOptions {
            eps: 1e-3,
            cache_bytes: 256 << 20,
            max_iter: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    /// Decision function is `sum_i y_i a_i K(x_i, x) - rho`.
    pub rho: f64,
    pub iterations: usize,
    /// Final maximal violation.
    pub gap: f64,
    pub converged: bool,
    pub objective: f64,
}

/// Rows of K with an LRU cache capped in bytes.
struct RowCache<'a, G: Gram> {
    gram: &'a G,
    cache: LruCache<usize, Vec<f64>>,
}

impl<'a, G: Gram> RowCache<'a, G> {
    fn new(gram: &'a G, bytes: usize) -> Self {
        let row_bytes = gram.n().max(1) * std::mem::size_of::<f64>();
        let cap = (bytes / row_bytes).max(2);
        RowCache {
            gram,
            cache: LruCache::new(NonZeroUsize::new(cap).unwrap()),
        }
    }

    fn get(&mut self, i: usize) -> &[f64] {
        if !self.cache.contains(&i) {
            let mut row = vec![0.0; self.gram.n()];
            self.gram.row(i, &mut row);
            self.cache.put(i, row);
        }
        self.cache.get(&i).unwrap()
    }
}

/// Solves the dual for labels `y` in {-1, +1} and per-sample bounds `c`.
pub fn solve<G: Gram>(gram: &G, y: &[f64], c: &[f64], opts: &SmoOptions) -> Result<SmoSolution> {
    let n = gram.n();
    if y.len() != n || c.len() != n {
        return Err(Error::InvalidInput("SMO inputs disagree in length".into()));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::InvalidInput("SMO labels must be +1 or -1".into()));
    }
    if c.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput("SMO bounds must be positive and finite".into()));
    }
    if !y.contains(&1.0) || !y.contains(&-1.0) {
        return Err(Error::Training("both classes are needed".into()));
    }

    let diag: Vec<f64> = (0..n).map(|i| gram.diag(i)).collect();
    let mut rows = RowCache::new(gram, opts.cache_bytes);
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut iterations = 0;
    let mut gap = f64::INFINITY;

    let in_up = |a: f64, yt: f64, ct: f64| (yt > 0.0 && a < ct) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64, ct: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < ct);

    while iterations < opts.max_iter {
        let (mut gmax, mut gmin) = (f64::NEG_INFINITY, f64::INFINITY);
        let (mut i, mut j) = (usize::MAX, usize::MAX);
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t], c[t]) && v >= gmax {
                gmax = v;
                i = t;
            }
            if in_low(alpha[t], y[t], c[t]) && v <= gmin {
                gmin = v;
                j = t;
            }
        }
        gap = gmax - gmin;
        if i == usize::MAX || j == usize::MAX || gap < opts.eps {
            break;
        }
        iterations += 1;

        let ki = rows.get(i).to_vec();
        let kj = rows.get(j);
        let kij = ki[j];
        let (ci, cj) = (c[i], c[j]);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        if y[i] != y[j] {
            let mut quad = diag[i] + diag[j] + 2.0 * kij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > ci - cj {
                if ai > ci {
                    ai = ci;
                    aj = ci - diff;
                }
            } else if aj > cj {
                aj = cj;
                ai = cj + diff;
            }
        } else {
            let mut quad = diag[i] + diag[j] - 2.0 * kij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > ci {
                if ai > ci {
                    ai = ci;
                    aj = sum - ci;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > cj {
                if aj > cj {
                    aj = cj;
                    ai = sum - cj;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        // Q_ti = y_t y_i K_ti.
        let (di, dj) = ((ai - old_i) * y[i], (aj - old_j) * y[j]);
        for t in 0..n {
            grad[t] += y[t] * (ki[t] * di + kj[t] * dj);
        }
    }

    let converged = gap < opts.eps;
    if !converged {
        warn!("SMO stopped after {iterations} iterations with violation {gap:.3e}");
    }
    let rho = compute_rho(&alpha, &grad, y, c);
    // Qa = G + e.
    let objective = alpha.iter().zip(&grad).map(|(a, g)| 0.5 * a * (g + 1.0) - a).sum();
    Ok(SmoSolution {
        alpha,
        rho,
        iterations,
        gap,
        converged,
        objective,
    })
}

fn compute_rho(alpha: &[f64], grad: &[f64], y: &[f64], c: &[f64]) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c[t] {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    }
}

/// Dual objective `1/2 a'Qa - e'a` evaluated from scratch.
pub fn dual_objective<G: Gram>(gram: &G, y: &[f64], alpha: &[f64]) -> f64 {
    let n = gram.n();
    let mut row = vec![0.0; n];
    let mut quad = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        gram.row(i, &mut row);
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * row[j];
        }
    }
    0.5 * quad - alpha.iter().sum::<f64>()
}

/// Maximal KKT violation `m(a) - M(a)` of a dual point.
pub fn kkt_violation<G: Gram>(gram: &G, y: &[f64], c: &[f64], alpha: &[f64]) -> f64 {
    let n = gram.n();
    let mut row = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        gram.row(i, &mut row);
        for t in 0..n {
            grad[t] += y[t] * y[i] * row[t] * alpha[i];
        }
    }
    let (mut gmax, mut gmin) = (f64::NEG_INFINITY, f64::INFINITY);
    for t in 0..n {
        let v = -y[t] * grad[t];
        if (y[t] > 0.0 && alpha[t] < c[t]) || (y[t] < 0.0 && alpha[t] > 0.0) {
            gmax = gmax.max(v);
        }
        if (y[t] > 0.0 && alpha[t] > 0.0) || (y[t] < 0.0 && alpha[t] < c[t]) {
            gmin = gmin.min(v);
        }
    }
    (gmax - gmin).max(0.0)
}
