use serde::{Deserialize, Serialize};

/// Raised-cosine bump on the unit cycle: `amplitude * (1 + cos(pi d / width)) / 2`
/// for circular distance `|d| < width` from `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
    /// Part of the QRS complex (affected by [`BeatOverride`]).
    pub qrs: bool,
}

/// `coef(t) cos(2 pi (l phi + offset(t)))` for the l-th harmonic, with
/// linearly drifting coefficient and phase offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub coef: f64,
    pub coef_drift: f64,
    /// Cycles.
    pub offset: f64,
    pub offset_drift: f64,
}

impl Harmonic {
    pub fn fixed(coef: f64, offset: f64) -> Self {
        Harmonic {
            coef,
            coef_drift: 0.0,
            offset,
            offset_drift: 0.0,
        }
    }
}

/// Per-beat perturbation of the QRS bumps of one cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeatOverride {
    pub cycle: i64,
    pub amplitude_scale: f64,
    pub width_scale: f64,
    /// Cycles added to the QRS bump centers (negative = premature).
    pub phase_shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ShapeSpec {
    Cosine,
    Harmonics(Vec<Harmonic>),
    Bumps(Vec<Bump>),
}

fn wrap(d: f64) -> f64 {
    d - d.round()
}

impl ShapeSpec {
    /// P, Q, R, S and T bumps, R peak at phase 0.
    pub fn ecg_like() -> Self {
        let b = |center, width, amplitude, qrs| Bump {
            center,
            width,
            amplitude,
            qrs,
        };
        ShapeSpec::Bumps(vec![
            b(-0.18, 0.06, 0.12, false),
            b(-0.025, 0.012, -0.12, true),
            b(0.0, 0.018, 1.0, true),
            b(0.025, 0.012, -0.2, true),
            b(0.30, 0.09, 0.3, false),
        ])
    }

    /// Shape value at absolute phase `phi` (cycles) and time `t`.
    pub fn eval(&self, phi: f64, t: f64, overrides: &[BeatOverride]) -> f64 {
        use std::f64::consts::{PI, TAU};
        match self {
            ShapeSpec::Cosine => (TAU * phi).cos(),
            ShapeSpec::Harmonics(hs) => hs
                .iter()
                .enumerate()
                .map(|(l, h)| {
                    let coef = h.coef + h.coef_drift * t;
                    let off = h.offset + h.offset_drift * t;
                    coef * (TAU * ((l + 1) as f64 * phi + off)).cos()
                })
                .sum(),
            ShapeSpec::Bumps(bumps) => bumps
                .iter()
                .map(|b| {
                    let (mut amp, mut width, mut center) = (b.amplitude, b.width, b.center);
                    if b.qrs && !overrides.is_empty() {
                        let cycle = (phi - b.center).round() as i64;
                        if let Some(o) = overrides.iter().find(|o| o.cycle == cycle) {
                            amp *= o.amplitude_scale;
                            width *= o.width_scale;
                            center += o.phase_shift;
                        }
                    }
                    let d = wrap(phi - center);
                    if d.abs() < width {
                        amp * 0.5 * (1.0 + (PI * d / width).cos())
                    } else {
                        0.0
                    }
                })
                .sum(),
        }
    }

    /// Phase in [0, 1) where the (time-zero) shape is largest.
    pub fn peak_phase(&self) -> f64 {
        const M: usize = 20_000;
        let mut best = (0.0, f64::MIN);
        for j in 0..M {
            let u = j as f64 / M as f64;
            let v = self.eval(u, 0.0, &[]);
            if v > best.1 + 1e-12 {
                best = (u, v);
            }
        }
        best.0
    }

    /// Fourier decay parameters of the time-zero shape: `delta =
    /// max_{k != 1} |s^(k)| / |s^(1)|` and `theta = sum_{n > d} |n s^(n)|`.
    pub fn fourier_profile(&self, d: usize) -> (f64, f64) {
        const M: usize = 4096;
        let vals: Vec<f64> = (0..M)
            .map(|j| self.eval(j as f64 / M as f64, 0.0, &[]))
            .collect();
        let coef = |k: usize| {
            let (mut re, mut im) = (0.0, 0.0);
            for (j, v) in vals.iter().enumerate() {
                let a = std::f64::consts::TAU * (k * j) as f64 / M as f64;
                re += v * a.cos();
                im -= v * a.sin();
            }
            (re * re + im * im).sqrt() / M as f64
        };
        let kmax = 200;
        let mags: Vec<f64> = (0..=kmax).map(coef).collect();
        let first = mags[1].max(f64::MIN_POSITIVE);
        let delta = mags
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != 1)
            .map(|(_, m)| m / first)
            .fold(0.0, f64::max);
        let theta = mags
            .iter()
            .enumerate()
            .skip(d + 1)
            .map(|(n, m)| n as f64 * m)
            .sum();
        (delta, theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ecg_template_peaks_at_zero() {
        let s = ShapeSpec::ecg_like();
        assert_eq!(s.peak_phase(), 0.0);
        assert!((s.eval(3.0, 0.0, &[]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn override_hits_one_cycle_only() {
        let s = ShapeSpec::ecg_like();
        let o = [BeatOverride { cycle: 2, amplitude_scale: 0.5, width_scale: 1.0, phase_shift: 0.0 }];
        assert!((s.eval(2.0, 0.0, &o) - 0.5).abs() < 1e-12);
        assert!((s.eval(1.0, 0.0, &o) - 1.0).abs() < 1e-12);
        assert!((s.eval(3.0, 0.0, &o) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_profile() {
        let (delta, theta) = ShapeSpec::Cosine.fourier_profile(1);
        assert!(delta < 1e-9 && theta < 1e-9);
        let (delta, _) = ShapeSpec::ecg_like().fourier_profile(10);
        assert!(delta > 0.5);
    }
}
