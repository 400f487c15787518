//! Butterworth IIR design by bilinear transform with prewarping, realised as a
//! cascade of second-order sections, plus forward-backward (zero-phase)
//! application with odd reflection padding and steady-state initial state.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One biquad, `a0` normalised to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sos {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Sos {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        (self.b[0] + self.b[1] * z_inv + self.b[2] * z2)
            / (self.a[0] + self.a[1] * z_inv + self.a[2] * z2)
    }

    fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }

    /// Poles of `1 + a1 z^-1 + a2 z^-2`.
    fn poles(&self) -> [Complex64; 2] {
        let (a1, a2) = (self.a[1], self.a[2]);
        let disc = Complex64::new(a1 * a1 - 4.0 * a2, 0.0).sqrt();
        [(-a1 + disc) / 2.0, (-a1 - disc) / 2.0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Band {
    Lowpass { cutoff: f64 },
    Bandpass { low: f64, high: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IirFilter {
    pub sections: Vec<Sos>,
    pub order: usize,
    pub band: Band,
    pub fs: f64,
}

/// Analog Butterworth prototype poles (unit cutoff).
fn prototype_poles(order: usize) -> Vec<Complex64> {
    (1..=order)
        .map(|k| {
            let theta = PI * (2 * k + order - 1) as f64 / (2 * order) as f64;
            Complex64::from_polar(1.0, theta)
        })
        .collect()
}

fn bilinear(s: Complex64, fs: f64) -> Complex64 {
    let k = 2.0 * fs;
    (k + s) / (k - s)
}

fn prewarp(f: f64, fs: f64) -> f64 {
    2.0 * fs * (PI * f / fs).tan()
}

/// Groups digital poles into conjugate pairs (real poles paired together)
/// and builds denominators.
fn pole_pairs(mut poles: Vec<Complex64>) -> Vec<[f64; 3]> {
    const IM_EPS: f64 = 1e-12;
    let mut complex: Vec<Complex64> = poles.iter().copied().filter(|p| p.im > IM_EPS).collect();
    complex.sort_by(|a, b| a.re.total_cmp(&b.re));
    poles.retain(|p| p.im.abs() <= IM_EPS);
    let mut real: Vec<f64> = poles.iter().map(|p| p.re).collect();
    real.sort_by(f64::total_cmp);
    let mut dens: Vec<[f64; 3]> = complex
        .iter()
        .map(|p| [1.0, -2.0 * p.re, p.norm_sqr()])
        .collect();
    for pair in real.chunks(2) {
        match pair {
            [r1, r2] => dens.push([1.0, -(r1 + r2), r1 * r2]),
            [r] => dens.push([1.0, -r, 0.0]),
            _ => unreachable!(),
        }
    }
    dens
}

impl IirFilter {
    /// Complex frequency response at `f` Hz.
    pub fn response(&self, f: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * f / self.fs);
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
    }

    pub fn magnitude(&self, f: f64) -> f64 {
        self.response(f).norm()
    }

    pub fn is_stable(&self) -> bool {
        self.sections
            .iter()
            .all(|s| s.poles().iter().all(|p| p.norm() < 1.0))
    }

    /// Causal filtering starting from rest.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for s in &self.sections {
            run_section(s, &mut y, [0.0, 0.0]);
        }
        y
    }

    /// Steady-state section states for a unit step, so a constant input
    /// produces a constant output from the first sample.
    fn step_states(&self) -> Vec<[f64; 2]> {
        let mut level = 1.0;
        self.sections
            .iter()
            .map(|s| {
                let out = s.dc_gain() * level;
                let z2 = s.b[2] * level - s.a[2] * out;
                let z1 = s.b[1] * level - s.a[1] * out + z2;
                level = out;
                [z1, z2]
            })
            .collect()
    }

    fn filter_with_initial(&self, x: &mut [f64], x0: f64) {
        let zi = self.step_states();
        for (s, z) in self.sections.iter().zip(&zi) {
            run_section(s, x, [z[0] * x0, z[1] * x0]);
        }
    }

    /// Pad length used by [`IirFilter::filtfilt`]: three times the filter length.
    pub fn pad_len(&self) -> usize {
        3 * (2 * self.sections.len() + 1)
    }

    /// Zero-phase forward-backward filtering with odd reflection padding of
    /// [`IirFilter::pad_len`] samples, each pass starting in the steady state
    /// of its first sample.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        self.filtfilt_padded(x, self.pad_len(), EdgeMode::Odd)
    }

    pub fn filtfilt_padded(&self, x: &[f64], pad: usize, mode: EdgeMode) -> Vec<f64> {
        let n = x.len();
        if n == 0 {
            return Vec::new();
        }
        let pad = pad.min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        let (first, last) = (x[0], x[n - 1]);
        match mode {
            EdgeMode::Odd => {
                ext.extend((1..=pad).rev().map(|i| 2.0 * first - x[i]));
                ext.extend_from_slice(x);
                ext.extend((1..=pad).map(|i| 2.0 * last - x[n - 1 - i]));
            }
            EdgeMode::Even => {
                ext.extend((1..=pad).rev().map(|i| x[i]));
                ext.extend_from_slice(x);
                ext.extend((1..=pad).map(|i| x[n - 1 - i]));
            }
        }
        // Odd padding starts from the edge sample; even padding from the mean
        // of the padded stretch, since its first sample may sit on a beat.
        let start_level = |v: &[f64]| match mode {
            EdgeMode::Odd => v[0],
            EdgeMode::Even => super::mean(&v[..(pad + 1).min(v.len())]),
        };
        let x0 = start_level(&ext);
        self.filter_with_initial(&mut ext, x0);
        ext.reverse();
        let x0 = start_level(&ext);
        self.filter_with_initial(&mut ext, x0);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }
}

/// Extension used by [`IirFilter::filtfilt_padded`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeMode {
    /// `2 x[0] - x[i]`: preserves the edge value and slope.
    Odd,
    /// `x[i]`: mirrors the signal, suited to long pads on oscillating input.
    Even,
}

/// Direct form II transposed, in place.
fn run_section(s: &Sos, x: &mut [f64], state: [f64; 2]) {
    let [b0, b1, b2] = s.b;
    let [_, a1, a2] = s.a;
    let [mut z1, mut z2] = state;
    for v in x.iter_mut() {
        let input = *v;
        let out = b0 * input + z1;
        z1 = b1 * input - a1 * out + z2;
        z2 = b2 * input - a2 * out;
        *v = out;
    }
}

fn check_edge(f: f64, fs: f64, what: &str) -> Result<()> {
    if !(f > 0.0 && f < fs / 2.0) {
        return Err(Error::FilterDesign(format!(
            "{what} {f} Hz must lie in (0, {}) Hz",
            fs / 2.0
        )));
    }
    Ok(())
}

/// Butterworth bandpass of prototype order `order` (digital order `2*order`).
///
/// Every section carries zeros at z = 1 and z = -1; gain is set so the
/// response at the prewarped geometric centre is exactly 1.
pub fn design_butter_bandpass(order: usize, f_lo: f64, f_hi: f64, fs: f64) -> Result<IirFilter> {
    if order == 0 {
        return Err(Error::FilterDesign("order must be at least 1".into()));
    }
    check_edge(f_lo, fs, "low edge")?;
    check_edge(f_hi, fs, "high edge")?;
    if f_lo >= f_hi {
        return Err(Error::FilterDesign(format!(
            "low edge {f_lo} Hz must be below high edge {f_hi} Hz"
        )));
    }
    let w_lo = prewarp(f_lo, fs);
    let w_hi = prewarp(f_hi, fs);
    let bw = w_hi - w_lo;
    let w0_sq = w_lo * w_hi;

    let mut digital = Vec::with_capacity(2 * order);
    for p in prototype_poles(order) {
        // s^2 - p*bw*s + w0^2 = 0
        let pb = p * bw;
        let disc = (pb * pb - 4.0 * w0_sq).sqrt();
        for s in [(pb + disc) / 2.0, (pb - disc) / 2.0] {
            digital.push(bilinear(s, fs));
        }
    }
    let sections: Vec<Sos> = pole_pairs(digital)
        .into_iter()
        .map(|a| Sos {
            b: [1.0, 0.0, -1.0],
            a,
        })
        .collect();
    let mut filt = IirFilter {
        sections,
        order,
        band: Band::Bandpass {
            low: f_lo,
            high: f_hi,
        },
        fs,
    };
    let center = fs / PI * (w0_sq.sqrt() / (2.0 * fs)).atan();
    let g = filt.magnitude(center);
    for b in filt.sections[0].b.iter_mut() {
        *b /= g;
    }
    Ok(filt)
}

/// Butterworth lowpass with unit DC gain.
pub fn design_butter_lowpass(order: usize, cutoff: f64, fs: f64) -> Result<IirFilter> {
    if order == 0 {
        return Err(Error::FilterDesign("order must be at least 1".into()));
    }
    check_edge(cutoff, fs, "cutoff")?;
    let wc = prewarp(cutoff, fs);
    let digital: Vec<Complex64> = prototype_poles(order)
        .into_iter()
        .map(|p| bilinear(p * wc, fs))
        .collect();
    let dens = pole_pairs(digital);
    let mut sections: Vec<Sos> = dens
        .into_iter()
        .map(|a| {
            let b = if a[2] == 0.0 {
                [1.0, 1.0, 0.0]
            } else {
                [1.0, 2.0, 1.0]
            };
            let mut s = Sos { b, a };
            let g = s.dc_gain();
            for v in s.b.iter_mut() {
                *v /= g;
            }
            s
        })
        .collect();
    sections.retain(|s| s.b.iter().any(|&v| v != 0.0));
    Ok(IirFilter {
        sections,
        order,
        band: Band::Lowpass { cutoff },
        fs,
    })
}
