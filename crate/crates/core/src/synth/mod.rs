//! Ground-truth generator for the adaptive non-harmonic model
//! `y(t) = A(t) s(phi(t)) + noise(t)`, including a time-varying shape built
//! from drifting harmonics. Every generated signal carries its true phase,
//! instantaneous frequency and per-cycle peak locations, which the tests of
//! the other modules use as an oracle.

mod shape;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use shape::{BeatOverride, Bump, Harmonic, ShapeSpec};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AmplitudeSpec {
    Constant(f64),
    /// `mean * (1 + depth * sin(2 pi freq t))`
    Sinusoidal { mean: f64, depth: f64, freq: f64 },
}

impl AmplitudeSpec {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            AmplitudeSpec::Constant(a) => a,
            AmplitudeSpec::Sinusoidal { mean, depth, freq } => {
                mean * (1.0 + depth * (std::f64::consts::TAU * freq * t).sin())
            }
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            AmplitudeSpec::Constant(_) => 0.0,
            AmplitudeSpec::Sinusoidal { mean, depth, freq } => {
                let w = std::f64::consts::TAU * freq;
                mean * depth * w * (w * t).cos()
            }
        }
    }
}

/// Phase function in cycles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PhaseSpec {
    Constant { freq: f64, offset: f64 },
    /// Instantaneous frequency `f0 + rate * t`.
    LinearChirp { f0: f64, rate: f64, offset: f64 },
    /// Instantaneous frequency `f0 + deviation * sin(2 pi rate t)`.
    SinusoidalFm { f0: f64, deviation: f64, rate: f64, offset: f64 },
}

impl PhaseSpec {
    pub fn constant(freq: f64) -> Self {
        PhaseSpec::Constant { freq, offset: 0.0 }
    }

    pub fn phase(&self, t: f64) -> f64 {
        use std::f64::consts::TAU;
        match *self {
            PhaseSpec::Constant { freq, offset } => offset + freq * t,
            PhaseSpec::LinearChirp { f0, rate, offset } => offset + f0 * t + 0.5 * rate * t * t,
            PhaseSpec::SinusoidalFm { f0, deviation, rate, offset } => {
                offset + f0 * t + deviation / (TAU * rate) * (1.0 - (TAU * rate * t).cos())
            }
        }
    }

    pub fn freq(&self, t: f64) -> f64 {
        match *self {
            PhaseSpec::Constant { freq, .. } => freq,
            PhaseSpec::LinearChirp { f0, rate, .. } => f0 + rate * t,
            PhaseSpec::SinusoidalFm { f0, deviation, rate, .. } => {
                f0 + deviation * (std::f64::consts::TAU * rate * t).sin()
            }
        }
    }

    pub fn freq_derivative(&self, t: f64) -> f64 {
        use std::f64::consts::TAU;
        match *self {
            PhaseSpec::Constant { .. } => 0.0,
            PhaseSpec::LinearChirp { rate, .. } => rate,
            PhaseSpec::SinusoidalFm { deviation, rate, .. } => {
                deviation * TAU * rate * (TAU * rate * t).cos()
            }
        }
    }

    /// Time at which the phase reaches `target` cycles (phase is increasing).
    pub fn time_of(&self, target: f64, hint: f64) -> f64 {
        let mut lo = hint;
        let mut hi = hint;
        let mut step = 1.0;
        while self.phase(lo) > target {
            lo -= step;
            step *= 2.0;
        }
        step = 1.0;
        while self.phase(hi) < target {
            hi += step;
            step *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.phase(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-13 {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NoiseSpec {
    None,
    WhiteGaussian { variance: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnhSpec {
    pub amplitude: AmplitudeSpec,
    pub phase: PhaseSpec,
    pub shape: ShapeSpec,
    pub noise: NoiseSpec,
    /// Regularity budget: `|A'| <= eps phi'` and `|phi''| <= eps phi'`.
    pub epsilon: f64,
    #[serde(default)]
    pub overrides: Vec<BeatOverride>,
}

impl AnhSpec {
    pub fn tone(amplitude: f64, freq: f64) -> Self {
        AnhSpec {
            amplitude: AmplitudeSpec::Constant(amplitude),
            phase: PhaseSpec::constant(freq),
            shape: ShapeSpec::Cosine,
            noise: NoiseSpec::None,
            epsilon: 0.0,
            overrides: Vec::new(),
        }
    }

    /// ECG-like beats at a constant rate.
    pub fn ecg(rate_hz: f64) -> Self {
        AnhSpec {
            amplitude: AmplitudeSpec::Constant(1.0),
            phase: PhaseSpec::constant(rate_hz),
            shape: ShapeSpec::ecg_like(),
            noise: NoiseSpec::None,
            epsilon: 0.0,
            overrides: Vec::new(),
        }
    }

    pub fn with_noise(mut self, variance: f64) -> Self {
        self.noise = NoiseSpec::WhiteGaussian { variance };
        self
    }

    /// Checks the regularity budget on the sampling grid.
    pub fn check_regularity(&self, fs: f64, duration: f64) -> Result<()> {
        let n = (fs * duration).round() as usize;
        let tol = 1e-12;
        for i in 0..n {
            let t = i as f64 / fs;
            let f = self.phase.freq(t);
            if !(f > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "phi'(t) = {f} must be positive (t = {t:.4} s)"
                )));
            }
            let da = self.amplitude.derivative(t).abs();
            if da > self.epsilon * f + tol {
                return Err(Error::InvalidInput(format!(
                    "|A'(t)| = {da:.4e} exceeds eps*phi'(t) = {:.4e} at t = {t:.4} s",
                    self.epsilon * f
                )));
            }
            let dd = self.phase.freq_derivative(t).abs();
            if dd > self.epsilon * f + tol {
                return Err(Error::InvalidInput(format!(
                    "|phi''(t)| = {dd:.4e} exceeds eps*phi'(t) = {:.4e} at t = {t:.4} s",
                    self.epsilon * f
                )));
            }
            if self.amplitude.value(t) <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "A(t) must be positive (t = {t:.4} s)"
                )));
            }
        }
        Ok(())
    }

    /// Noise-free sample at time `t`.
    pub fn clean_at(&self, t: f64) -> f64 {
        self.amplitude.value(t) * self.shape.eval(self.phase.phase(t), t, &self.overrides)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub fs: f64,
    pub signal: Vec<f64>,
    pub clean: Vec<f64>,
    pub true_peaks: Vec<usize>,
    /// Phase in cycles.
    pub true_phase: Vec<f64>,
    /// Instantaneous frequency in Hz.
    pub true_if: Vec<f64>,
}

impl GroundTruth {
    pub fn time(&self, i: usize) -> f64 {
        i as f64 / self.fs
    }
}

pub fn generate(spec: &AnhSpec, fs: f64, duration: f64, seed: u64) -> Result<GroundTruth> {
    if !(fs > 0.0 && duration > 0.0) {
        return Err(Error::InvalidInput("fs and duration must be positive".into()));
    }
    spec.check_regularity(fs, duration)?;
    let n = (fs * duration).round() as usize;
    let times: Vec<f64> = (0..n).map(|i| i as f64 / fs).collect();
    let clean: Vec<f64> = times.iter().map(|&t| spec.clean_at(t)).collect();
    let true_phase: Vec<f64> = times.iter().map(|&t| spec.phase.phase(t)).collect();
    let true_if: Vec<f64> = times.iter().map(|&t| spec.phase.freq(t)).collect();

    let signal = match spec.noise {
        NoiseSpec::None => clean.clone(),
        NoiseSpec::WhiteGaussian { variance } => {
            let normal = Normal::new(0.0, variance.max(0.0).sqrt())
                .map_err(|e| Error::InvalidInput(format!("noise: {e}")))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            clean.iter().map(|c| c + normal.sample(&mut rng)).collect()
        }
    };

    // One peak per cycle: the time where the phase reaches k + peak_phase,
    // snapped to the largest clean sample nearby.
    let peak_phase = spec.shape.peak_phase();
    let mut true_peaks = Vec::new();
    if n > 0 {
        let first = (true_phase[0] - peak_phase).ceil() as i64;
        let last = (true_phase[n - 1] - peak_phase).floor() as i64;
        let mut hint = 0.0;
        for k in first..=last {
            let t = spec.phase.time_of(k as f64 + peak_phase, hint);
            hint = t;
            let center = (t * fs).round() as i64;
            let best = (center - 2..=center + 2)
                .filter(|&i| i >= 0 && (i as usize) < n)
                .max_by(|&a, &b| clean[a as usize].total_cmp(&clean[b as usize]));
            if let Some(i) = best {
                true_peaks.push(i as usize);
            }
        }
    }

    Ok(GroundTruth {
        fs,
        signal,
        clean,
        true_peaks,
        true_phase,
        true_if,
    })
}

/// Maximum deviation between cycle `k` resampled through the local linear
/// dilation `1/phi'(t~_k)` and the template shape. The dilation factor is the
/// mean-value-theorem one, i.e. the cycle's length `t_{k+1} - t_k`.
pub fn check_dilation(spec: &AnhSpec, k: i64) -> f64 {
    let t0 = spec.phase.time_of(k as f64, 0.0);
    let t1 = spec.phase.time_of(k as f64 + 1.0, t0);
    let period = t1 - t0;
    const M: usize = 4000;
    (0..M)
        .map(|j| {
            let u = j as f64 / M as f64;
            let t = t0 + u * period;
            let observed = spec.shape.eval(spec.phase.phase(t), t, &spec.overrides);
            let template = spec.shape.eval(k as f64 + u, t, &spec.overrides);
            (observed - template).abs()
        })
        .fold(0.0, f64::max)
}

/// Writes `time,signal,clean` rows.
pub fn write_csv(truth: &GroundTruth, path: &std::path::Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["time", "signal", "clean"])?;
    for i in 0..truth.signal.len() {
        w.write_record(&[
            format!("{}", truth.time(i)),
            format!("{}", truth.signal[i]),
            format!("{}", truth.clean[i]),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
