use num_complex::Complex64;

use super::cwt::Cwt;
use super::plane::{PlaneKind, TfPlane};
use crate::dsp::median;
use crate::{Error, Result};

/// Threshold below which CWT coefficients are treated as zero:
/// `max(relative * median|W|, absolute)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gamma {
    pub relative: f64,
    pub absolute: f64,
}

impl Default for Gamma {
    fn default() -> Self {
        Gamma {
            relative: 1e-8,
            absolute: 0.0,
        }
    }
}

/// Per-coefficient instantaneous frequency in Hz with its validity mask.
#[derive(Debug, Clone)]
pub struct ReassignmentField {
    pub omega: Vec<f64>,
    pub valid: Vec<bool>,
    pub n_rows: usize,
    pub n_cols: usize,
    pub gamma: f64,
}

impl ReassignmentField {
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let i = row * self.n_cols + col;
        self.valid[i].then_some(self.omega[i])
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }
}

/// `omega(a, b) = Im(d_b W / W) / (2 pi)` wherever `|W| >= gamma` and `|W| > 0`.
pub fn reassign(cwt: &Cwt, gamma: Gamma) -> ReassignmentField {
    let w = &cwt.plane;
    let mags: Vec<f64> = w.values.iter().map(|v| v.norm()).collect();
    let g = (gamma.relative * median(&mags).unwrap_or(0.0)).max(gamma.absolute);
    let mut omega = vec![f64::NAN; mags.len()];
    let mut valid = vec![false; mags.len()];
    for i in 0..mags.len() {
        if mags[i] > 0.0 && mags[i] >= g {
            let om = (cwt.deriv.values[i] / w.values[i]).im / std::f64::consts::TAU;
            if om.is_finite() {
                omega[i] = om;
                valid[i] = true;
            }
        }
    }
    ReassignmentField {
        omega,
        valid,
        n_rows: w.n_rows,
        n_cols: w.n_cols,
        gamma: g,
    }
}

/// `n` equally spaced bin centers from `lo` to `hi` inclusive.
pub fn linear_bins(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|j| lo + j as f64 * step).collect()
}

/// Width of each bin, from half the distance to its neighbours.
pub(crate) fn bin_widths(bins: &[f64]) -> Vec<f64> {
    let n = bins.len();
    (0..n)
        .map(|j| {
            let left = if j > 0 { bins[j] - bins[j - 1] } else { bins[1] - bins[0] };
            let right = if j + 1 < n { bins[j + 1] - bins[j] } else { bins[n - 1] - bins[n - 2] };
            0.5 * (left + right)
        })
        .collect()
}

/// Integration weight `da` of each log-spaced scale.
fn scale_steps(scales: &[f64]) -> Vec<f64> {
    let n = scales.len();
    if n == 1 {
        return vec![0.0];
    }
    (0..n)
        .map(|r| {
            let (lo, hi) = if r == 0 {
                (0, 1)
            } else if r + 1 == n {
                (n - 2, n - 1)
            } else {
                (r - 1, r + 1)
            };
            let dlog = (scales[hi] / scales[lo]).ln().abs() / (hi - lo) as f64;
            scales[r] * dlog
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SqueezeStats {
    /// Valid coefficients whose frequency fell outside the bin range.
    pub dropped: usize,
    pub kept: usize,
}

/// Moves every valid coefficient `W(a, b) a^(-3/2) da` into the bin nearest to
/// `omega(a, b)`. The result is a density in frequency (divided by the bin
/// width), so summing `S * dxi` over bins integrates it.
pub fn squeeze(cwt: &Cwt, field: &ReassignmentField, freq_bins: &[f64]) -> Result<(TfPlane, SqueezeStats)> {
    if freq_bins.len() < 2 || freq_bins.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(Error::InvalidInput("squeeze bins must be strictly increasing (at least 2)".into()));
    }
    let w = &cwt.plane;
    if field.n_rows != w.n_rows || field.n_cols != w.n_cols {
        return Err(Error::InvalidInput("reassignment field does not match the CWT plane".into()));
    }
    let widths = bin_widths(freq_bins);
    let lo_edge = freq_bins[0] - 0.5 * widths[0];
    let hi_edge = freq_bins[freq_bins.len() - 1] + 0.5 * widths[widths.len() - 1];
    let steps = scale_steps(&w.row_axis);
    let mut out = TfPlane::zeros(
        PlaneKind::Squeezed,
        w.time_axis.clone(),
        freq_bins.to_vec(),
        freq_bins.to_vec(),
    );
    let mut stats = SqueezeStats::default();
    let n_cols = w.n_cols;
    for r in 0..w.n_rows {
        let a = w.row_axis[r];
        let weight = a.powf(-1.5) * steps[r];
        for c in 0..n_cols {
            let i = r * n_cols + c;
            if !field.valid[i] {
                continue;
            }
            let om = field.omega[i];
            if om < lo_edge || om >= hi_edge {
                stats.dropped += 1;
                continue;
            }
            let j = nearest_bin(freq_bins, om);
            out.values[j * n_cols + c] += w.values[i] * (weight / widths[j]);
            stats.kept += 1;
        }
    }
    Ok((out, stats))
}

pub(crate) fn nearest_bin(bins: &[f64], f: f64) -> usize {
    match bins.binary_search_by(|b| b.total_cmp(&f)) {
        Ok(j) => j,
        Err(0) => 0,
        Err(j) if j == bins.len() => bins.len() - 1,
        Err(j) => {
            if f - bins[j - 1] <= bins[j] - f {
                j - 1
            } else {
                j
            }
        }
    }
}

/// Sum of `S * dxi` over the rows `lo..=hi` of one column.
pub(crate) fn band_integral(s: &TfPlane, widths: &[f64], col: usize, lo: usize, hi: usize) -> Complex64 {
    (lo..=hi).map(|j| s.get(j, col) * widths[j]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sst::cwt::{cwt_with_derivative, Padding};
    use crate::sst::wavelet::{log_scales, MotherWavelet};

    fn tone(f0: f64, fs: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (std::f64::consts::TAU * f0 * i as f64 / fs).cos()).collect()
    }

    fn setup(x: &[f64], fs: f64, iff: f64) -> (Cwt, Vec<f64>) {
        let w = MotherWavelet::for_iff(iff, 0.8).unwrap();
        let scales = log_scales(&w, iff / 4.0, iff * 4.0, 32).unwrap();
        let c = cwt_with_derivative(x, fs, &scales, &w, Padding::Reflect(1024)).unwrap();
        (c, linear_bins(iff / 4.0, iff * 4.0, 512))
    }

    #[test]
    fn tone_reassigns_to_its_frequency() {
        let fs = 100.0;
        let (c, bins) = setup(&tone(1.25, fs, 4000), fs, 1.2);
        let field = reassign(&c, Gamma::default());
        let step = bins[1] - bins[0];
        let mags: Vec<f64> = c.plane.values.iter().map(|v| v.norm()).collect();
        let big = mags.iter().copied().fold(0.0, f64::max);
        for r in 0..field.n_rows {
            for col in 800..3200 {
                // Coefficients carrying visible energy sit on the tone.
                if mags[r * field.n_cols + col] > 1e-3 * big {
                    let om = field.get(r, col).unwrap();
                    assert!((om - 1.25).abs() <= step, "{om}");
                }
            }
        }
    }

    #[test]
    fn zero_signal_fully_masked() {
        let (c, bins) = setup(&vec![0.0; 1000], 100.0, 1.0);
        let field = reassign(&c, Gamma::default());
        assert_eq!(field.valid_count(), 0);
        let (s, stats) = squeeze(&c, &field, &bins).unwrap();
        assert!(s.is_zero());
        assert_eq!(stats.kept, 0);
    }

    #[test]
    fn tone_mass_concentrates() {
        let fs = 100.0;
        let f0 = 1.37;
        let (c, bins) = setup(&tone(f0, fs, 4096), fs, 1.2);
        let field = reassign(&c, Gamma::default());
        let (s, _) = squeeze(&c, &field, &bins).unwrap();
        let j0 = nearest_bin(&bins, f0);
        for col in 600..3500 {
            let mags = s.column_abs(col);
            let total: f64 = mags.iter().sum();
            let near: f64 = mags[j0 - 1..=j0 + 1].iter().sum();
            assert!(near >= 0.95 * total, "col {col}: {}", near / total);
        }
    }

    #[test]
    fn out_of_range_frequencies_are_counted() {
        let fs = 100.0;
        let (c, _) = setup(&tone(1.2, fs, 2000), fs, 1.2);
        let field = reassign(&c, Gamma::default());
        let (_, stats) = squeeze(&c, &field, &linear_bins(2.0, 4.0, 64)).unwrap();
        assert!(stats.dropped > 0);
    }

    #[test]
    fn nearest_bin_edges() {
        let b = [1.0, 2.0, 3.0];
        assert_eq!(nearest_bin(&b, 0.2), 0);
        assert_eq!(nearest_bin(&b, 1.49), 0);
        assert_eq!(nearest_bin(&b, 1.51), 1);
        assert_eq!(nearest_bin(&b, 3.0), 2);
        assert_eq!(nearest_bin(&b, 9.0), 2);
    }
}
