use rayon::prelude::*;

/// `exp(-gamma |a - b|^2)`.
pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// Symmetric kernel matrix accessed one row at a time.
pub trait Gram: Sync {
    fn n(&self) -> usize;
    fn row(&self, i: usize, out: &mut [f64]);
    fn diag(&self, i: usize) -> f64;
}

pub struct RbfGram<'a> {
    pub x: &'a [Vec<f64>],
    pub gamma: f64,
}

impl Gram for RbfGram<'_> {
    fn n(&self) -> usize {
        self.x.len()
    }

    fn row(&self, i: usize, out: &mut [f64]) {
        let xi = &self.x[i];
        let f = |(o, xj): (&mut f64, &Vec<f64>)| *o = rbf(xi, xj, self.gamma);
        if out.len() >= 8192 {
            out.par_iter_mut().zip(self.x.par_iter()).for_each(f);
        } else {
            out.iter_mut().zip(self.x.iter()).for_each(f);
        }
    }

    fn diag(&self, _: usize) -> f64 {
        1.0
    }
}

/// Precomputed kernel matrix.
pub struct DenseGram(pub Vec<Vec<f64>>);

impl Gram for DenseGram {
    fn n(&self) -> usize {
        self.0.len()
    }

    fn row(&self, i: usize, out: &mut [f64]) {
        out.copy_from_slice(&self.0[i]);
    }

    fn diag(&self, i: usize) -> f64 {
        self.0[i][i]
    }
}
