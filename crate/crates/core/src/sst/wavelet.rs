use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Bump mother wavelet defined by its spectral profile
/// `psi^(xi) = exp(1 / (((xi - center) / sigma)^2 - 1))` on
/// `(center - sigma, center + sigma)` and zero elsewhere. Frequencies are in Hz,
/// so a scale `a` moves the peak to `center / a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotherWavelet {
    pub center: f64,
    pub sigma: f64,
}

impl MotherWavelet {
    pub fn new(center: f64, sigma: f64) -> Result<Self> {
        if !(center > 0.0 && sigma > 0.0 && sigma < center) {
            return Err(Error::InvalidInput(format!(
                "bump wavelet needs 0 < sigma < center, got center={center}, sigma={sigma}"
            )));
        }
        Ok(MotherWavelet { center, sigma })
    }

    /// Wavelet centered on `iff` with half-support `ratio * iff`.
    pub fn for_iff(iff: f64, ratio: f64) -> Result<Self> {
        Self::new(iff, ratio * iff)
    }

    pub fn spectrum(&self, xi: f64) -> f64 {
        let u = (xi - self.center) / self.sigma;
        let d = u * u - 1.0;
        if d < 0.0 {
            (1.0 / d).exp()
        } else {
            0.0
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.sigma, self.center + self.sigma)
    }

    /// Frequency in Hz at which the wavelet dilated by `scale` peaks.
    pub fn freq_of_scale(&self, scale: f64) -> f64 {
        self.center / scale
    }

    pub fn scale_of_freq(&self, freq: f64) -> f64 {
        self.center / freq
    }

    /// `R_psi = int psi^(zeta) / zeta dzeta`, the reconstruction constant.
    pub fn admissibility(&self) -> f64 {
        let (lo, hi) = self.support();
        let n = 20_000;
        let h = (hi - lo) / n as f64;
        let f = |z: f64| self.spectrum(z) / z;
        let mut acc = f(lo) + f(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(lo + i as f64 * h);
        }
        acc * h / 3.0
    }
}

/// Log-spaced scales whose peak frequencies run from `f_lo` to `f_hi`
/// (increasing frequency, so decreasing scale) with `voices` per octave.
pub fn log_scales(wavelet: &MotherWavelet, f_lo: f64, f_hi: f64, voices: usize) -> Result<Vec<f64>> {
    if !(f_lo > 0.0 && f_hi > f_lo) || voices == 0 {
        return Err(Error::InvalidInput(format!(
            "scale range needs 0 < f_lo < f_hi and voices > 0 (got {f_lo}, {f_hi}, {voices})"
        )));
    }
    let steps = ((f_hi / f_lo).log2() * voices as f64 + 1e-9).floor() as usize;
    Ok((0..=steps)
        .map(|j| {
            let f = f_lo * 2f64.powf(j as f64 / voices as f64);
            wavelet.scale_of_freq(f)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_peaks_at_center() {
        let w = MotherWavelet::new(1.0, 0.8).unwrap();
        assert!((w.spectrum(1.0) - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(w.spectrum(0.2), 0.0);
        assert_eq!(w.spectrum(1.8), 0.0);
        assert_eq!(w.spectrum(-1.0), 0.0);
        assert!(w.spectrum(0.9) > w.spectrum(0.5));
    }

    #[test]
    fn rejects_wide_support() {
        assert!(MotherWavelet::new(1.0, 1.0).is_err());
        assert!(MotherWavelet::new(0.0, 0.1).is_err());
    }

    #[test]
    fn admissibility_matches_fine_riemann_sum() {
        let w = MotherWavelet::new(2.0, 1.6).unwrap();
        let n = 2_000_000;
        let (lo, hi) = w.support();
        let h = (hi - lo) / n as f64;
        let riemann: f64 = (0..n)
            .map(|i| {
                let z = lo + (i as f64 + 0.5) * h;
                w.spectrum(z) / z * h
            })
            .sum();
        assert!((w.admissibility() - riemann).abs() < 1e-9);
        // Scale free: R_psi depends only on sigma / center.
        let w2 = MotherWavelet::new(5.0, 4.0).unwrap();
        assert!((w.admissibility() - w2.admissibility()).abs() < 1e-12);
    }

    #[test]
    fn four_octaves_at_32_voices() {
        let w = MotherWavelet::new(1.2, 0.96).unwrap();
        let s = log_scales(&w, 0.3, 4.8, 32).unwrap();
        assert_eq!(s.len(), 129);
        assert!((w.freq_of_scale(s[0]) - 0.3).abs() < 1e-12);
        assert!((w.freq_of_scale(s[128]) - 4.8).abs() < 1e-9);
        assert!(s.windows(2).all(|p| p[1] < p[0]));
    }
}
