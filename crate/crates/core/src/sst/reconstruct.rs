use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::plane::TfPlane;
use super::squeeze::{band_integral, bin_widths};
use crate::{Error, Result};

/// Reconstructed oscillatory component: amplitude, unwrapped phase in cycles,
/// and the ridge frequency it was taken around.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseEstimate {
    pub fs: f64,
    pub amplitude: Vec<f64>,
    /// Cycles (radians / 2 pi), unwrapped.
    pub phase: Vec<f64>,
    /// Hz.
    pub ridge_freq: Vec<f64>,
    /// Index of the block each sample was taken from.
    pub block: Vec<u32>,
    /// Samples where the amplitude vanished and the phase was carried forward.
    pub undefined: Vec<bool>,
}

impl PhaseEstimate {
    pub fn len(&self) -> usize {
        self.phase.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phase.is_empty()
    }

    /// Instantaneous frequency by central differences of the phase, in Hz.
    pub fn phase_derivative(&self) -> Vec<f64> {
        let n = self.phase.len();
        (0..n)
            .map(|i| {
                if n < 2 {
                    0.0
                } else if i == 0 {
                    (self.phase[1] - self.phase[0]) * self.fs
                } else if i + 1 == n {
                    (self.phase[n - 1] - self.phase[n - 2]) * self.fs
                } else {
                    (self.phase[i + 1] - self.phase[i - 1]) * self.fs / 2.0
                }
            })
            .collect()
    }
}

/// `(2 / R_psi) sum S dxi` over rows `center[t] +- halfwidth` for each column.
/// The factor 2 returns the amplitude of the real input rather than of its
/// positive-frequency half.
pub fn band_component(s: &TfPlane, centers: &[usize], halfwidth: usize, r_psi: f64) -> Result<Vec<Complex64>> {
    if centers.len() != s.n_cols {
        return Err(Error::InvalidInput(format!(
            "ridge has {} points for a plane with {} columns",
            centers.len(),
            s.n_cols
        )));
    }
    let widths = bin_widths(&s.row_freq);
    let scale = 2.0 / r_psi;
    Ok(centers
        .iter()
        .enumerate()
        .map(|(c, &j)| {
            let lo = j.saturating_sub(halfwidth);
            let hi = (j + halfwidth).min(s.n_rows - 1);
            band_integral(s, &widths, c, lo, hi) * scale
        })
        .collect())
}

/// Whole-band reconstruction of the real signal.
pub fn reconstruct_full(s: &TfPlane, r_psi: f64) -> Vec<f64> {
    let widths = bin_widths(&s.row_freq);
    (0..s.n_cols)
        .map(|c| (band_integral(s, &widths, c, 0, s.n_rows - 1) * (2.0 / r_psi)).re)
        .collect()
}

/// Amplitude and unwrapped phase of the component around `ridge_bins`.
pub fn reconstruct(s: &TfPlane, ridge_bins: &[usize], halfwidth: usize, r_psi: f64, fs: f64) -> Result<PhaseEstimate> {
    let comp = band_component(s, ridge_bins, halfwidth, r_psi)?;
    let mut est = phase_of(&comp, fs);
    est.ridge_freq = ridge_bins.iter().map(|&j| s.row_freq[j]).collect();
    Ok(est)
}

/// Amplitude and unwrapped phase (in cycles) of a complex component.
pub fn phase_of(comp: &[Complex64], fs: f64) -> PhaseEstimate {
    let n = comp.len();
    let mut amplitude = Vec::with_capacity(n);
    let mut phase = Vec::with_capacity(n);
    let mut undefined = Vec::with_capacity(n);
    let mut prev_angle: Option<f64> = None;
    let mut unwrapped = 0.0;
    for z in comp {
        let a = z.norm();
        amplitude.push(a);
        if a > 0.0 && a.is_finite() {
            let ang = z.arg();
            unwrapped = match prev_angle {
                None => ang,
                Some(p) => {
                    let mut d = ang - p;
                    d -= std::f64::consts::TAU * (d / std::f64::consts::TAU).round();
                    unwrapped + d
                }
            };
            prev_angle = Some(ang);
            undefined.push(false);
        } else {
            undefined.push(true);
        }
        phase.push(unwrapped / std::f64::consts::TAU);
    }
    let undefined_count = undefined.iter().filter(|&&u| u).count();
    if undefined_count > 0 {
        log::warn!("phase undefined at {undefined_count} sample(s); last phase carried forward");
    }
    PhaseEstimate {
        fs,
        amplitude,
        phase,
        ridge_freq: vec![0.0; n],
        block: vec![0; n],
        undefined,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unwraps_rotating_phasor() {
        let fs = 100.0;
        let comp: Vec<Complex64> = (0..1000)
            .map(|i| Complex64::from_polar(2.0, std::f64::consts::TAU * 3.0 * i as f64 / fs))
            .collect();
        let est = phase_of(&comp, fs);
        for (i, p) in est.phase.iter().enumerate() {
            assert!((p - 3.0 * i as f64 / fs).abs() < 1e-9);
        }
        assert!(est.amplitude.iter().all(|a| (a - 2.0).abs() < 1e-12));
        assert!(est.phase_derivative().iter().all(|f| (f - 3.0).abs() < 1e-9));
    }

    #[test]
    fn zero_amplitude_carries_phase() {
        let comp = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ];
        let est = phase_of(&comp, 1.0);
        assert_eq!(est.undefined, vec![false, false, true, false]);
        assert_eq!(est.phase[2], est.phase[1]);
        assert!((est.phase[3] - 0.5).abs() < 1e-12);
    }
}
