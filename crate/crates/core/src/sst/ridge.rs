use super::plane::TfPlane;
use super::squeeze::nearest_bin;
use crate::dsp::median;
use crate::{Error, Result};

/// Ridge path through a squeezed plane: one row index per column.
#[derive(Debug, Clone, PartialEq)]
pub struct Ridge {
    pub bins: Vec<usize>,
    /// Hz.
    pub freqs: Vec<f64>,
    /// Row range searched, inclusive.
    pub band: (usize, usize),
    pub lambda: f64,
}

/// Rows of the plane whose frequency lies within `center +- halfwidth`.
pub fn band_rows(s: &TfPlane, center: f64, halfwidth: f64) -> Result<(usize, usize)> {
    let lo = center - halfwidth;
    let hi = center + halfwidth;
    let rows: Vec<usize> = (0..s.n_rows)
        .filter(|&j| s.row_freq[j] >= lo && s.row_freq[j] <= hi)
        .collect();
    match (rows.first(), rows.last()) {
        (Some(&a), Some(&b)) => Ok((a, b)),
        _ => Err(Error::InvalidInput(format!(
            "ridge band [{lo:.4}, {hi:.4}] Hz holds no frequency bins"
        ))),
    }
}

/// Dynamic-programming ridge inside `band_center +- band_halfwidth` Hz that
/// maximizes `sum |S| - lambda * (jump in bins)^2`, with `lambda` set so a
/// 3-bin jump costs 10% of the median column maximum.
pub fn extract_ridge(s: &TfPlane, band_center: f64, band_halfwidth: f64) -> Result<Ridge> {
    let band = band_rows(s, band_center, band_halfwidth)?;
    let col_max: Vec<f64> = (0..s.n_cols)
        .map(|c| (band.0..=band.1).map(|j| s.get(j, c).norm()).fold(0.0, f64::max))
        .collect();
    let lambda = 0.1 * median(&col_max).unwrap_or(0.0) / 9.0;
    extract_ridge_with_penalty(s, band, lambda)
}

pub fn extract_ridge_with_penalty(s: &TfPlane, band: (usize, usize), lambda: f64) -> Result<Ridge> {
    let (lo, hi) = band;
    if lo > hi || hi >= s.n_rows {
        return Err(Error::InvalidInput("empty ridge band".into()));
    }
    let nb = hi - lo + 1;
    let n_cols = s.n_cols;
    let mut score: Vec<f64> = (0..nb).map(|j| s.get(lo + j, 0).norm()).collect();
    let mut back = vec![0u32; nb * n_cols.max(1)];
    let mut best_prev = vec![0.0; nb];
    let mut arg = vec![0usize; nb];
    for c in 1..n_cols {
        max_minus_quadratic(&score, lambda, &mut best_prev, &mut arg);
        for j in 0..nb {
            back[c * nb + j] = arg[j] as u32;
            score[j] = best_prev[j] + s.get(lo + j, c).norm();
        }
    }
    let mut bins = vec![0usize; n_cols];
    if n_cols > 0 {
        let mut j = (0..nb).fold(0, |b, j| if score[j] > score[b] { j } else { b });
        for c in (0..n_cols).rev() {
            bins[c] = lo + j;
            if c > 0 {
                j = back[c * nb + j] as usize;
            }
        }
    }
    let freqs = bins.iter().map(|&j| s.row_freq[j]).collect();
    Ok(Ridge {
        bins,
        freqs,
        band,
        lambda,
    })
}

/// `out[j] = max_i g[i] - lambda (j - i)^2` with its argmax, in linear time
/// via the lower envelope of parabolas.
fn max_minus_quadratic(g: &[f64], lambda: f64, out: &mut [f64], arg: &mut [usize]) {
    let n = g.len();
    if lambda <= 0.0 {
        let best = (0..n).fold(0, |b, i| if g[i] > g[b] { i } else { b });
        for j in 0..n {
            out[j] = g[best];
            arg[j] = best;
        }
        return;
    }
    // Minimize (j - i)^2 + f[i] with f = -g / lambda.
    let f: Vec<f64> = g.iter().map(|v| -v / lambda).collect();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let inter = |q: usize, p: usize| {
        let (qf, pf) = (q as f64, p as f64);
        ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * qf - 2.0 * pf)
    };
    for q in 1..n {
        let mut sx = inter(q, v[k]);
        while sx <= z[k] {
            k -= 1;
            sx = inter(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = sx;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for j in 0..n {
        while z[k + 1] < j as f64 {
            k += 1;
        }
        let i = v[k];
        let d = j as f64 - i as f64;
        out[j] = g[i] - lambda * d * d;
        arg[j] = i;
    }
}

/// Ridge bin for a frequency, clamped to the plane.
pub fn bin_of(s: &TfPlane, f: f64) -> usize {
    nearest_bin(&s.row_freq, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sst::plane::PlaneKind;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};

    fn random_plane(rows: usize, cols: usize, seed: u64) -> TfPlane {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut p = TfPlane::zeros(
            PlaneKind::Squeezed,
            (0..cols).map(|c| c as f64).collect(),
            (0..rows).map(|r| r as f64).collect(),
            (0..rows).map(|r| r as f64).collect(),
        );
        for v in p.values.iter_mut() {
            *v = Complex64::new(rng.gen_range(0.0..1.0), 0.0);
        }
        p
    }

    fn path_value(p: &TfPlane, bins: &[usize], lambda: f64) -> f64 {
        let e: f64 = bins.iter().enumerate().map(|(c, &j)| p.get(j, c).norm()).sum();
        let pen: f64 = bins.windows(2).map(|w| (w[1] as f64 - w[0] as f64).powi(2)).sum();
        e - lambda * pen
    }

    /// Exhaustive O(cols * rows^2) Viterbi.
    fn brute_best(p: &TfPlane, lo: usize, hi: usize, lambda: f64) -> f64 {
        let mut score: Vec<f64> = (lo..=hi).map(|j| p.get(j, 0).norm()).collect();
        for c in 1..p.n_cols {
            score = (lo..=hi)
                .map(|j| {
                    (lo..=hi)
                        .map(|i| score[i - lo] - lambda * (j as f64 - i as f64).powi(2))
                        .fold(f64::NEG_INFINITY, f64::max)
                        + p.get(j, c).norm()
                })
                .collect();
        }
        score.into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn dp_matches_exhaustive_search() {
        for seed in 0..6 {
            let p = random_plane(17, 40, seed);
            for &lambda in &[0.0, 0.01, 0.2, 3.0] {
                let r = extract_ridge_with_penalty(&p, (2, 14), lambda).unwrap();
                let got = path_value(&p, &r.bins, lambda);
                let want = brute_best(&p, 2, 14, lambda);
                assert!((got - want).abs() < 1e-9, "seed {seed} lambda {lambda}: {got} vs {want}");
                assert!(r.bins.iter().all(|&b| (2..=14).contains(&b)));
            }
        }
    }

    #[test]
    fn empty_band_is_an_error() {
        let p = random_plane(10, 5, 1);
        assert!(extract_ridge(&p, 50.0, 1.0).is_err());
    }

    #[test]
    fn quadratic_envelope_matches_direct() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let g: Vec<f64> = (0..50).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let mut out = vec![0.0; 50];
        let mut arg = vec![0; 50];
        max_minus_quadratic(&g, 0.37, &mut out, &mut arg);
        for j in 0..50 {
            let direct = (0..50)
                .map(|i| g[i] - 0.37 * (j as f64 - i as f64).powi(2))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((out[j] - direct).abs() < 1e-12);
        }
    }
}
