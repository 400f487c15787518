use num_complex::Complex64;
use rustfft::FftPlanner;

use super::plane::{PlaneKind, TfPlane};
use super::wavelet::MotherWavelet;
use crate::{Error, Result};

/// Extension applied before the circular spectral transform; the output is
/// cropped back to the input length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    None,
    /// Mirror `n` samples at each end (edge sample not repeated).
    Reflect(usize),
    /// Extend each end by `len` samples copied from whole multiples of
    /// `period` samples inside the signal, which keeps a quasi-periodic
    /// signal's phase running forward across the edges.
    Periodic { len: usize, period: usize },
}

/// A CWT plane together with its time derivative `d/db W(a, b)`.
#[derive(Debug, Clone)]
pub struct Cwt {
    pub plane: TfPlane,
    pub deriv: TfPlane,
}

/// FFT bin frequencies in Hz (negative half for the upper bins).
pub(crate) fn fft_freqs(n: usize, fs: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let k = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            k * fs / n as f64
        })
        .collect()
}

fn periodic_pad(x: &[f64], pad: usize, period: usize) -> (Vec<f64>, usize) {
    let n = x.len();
    if period == 0 || period >= n {
        return reflect_pad(x, pad);
    }
    let mut out = Vec::with_capacity(n + 2 * pad);
    for m in (1..=pad).rev() {
        let q = m.div_ceil(period);
        out.push(x[(q * period - m).min(n - 1)]);
    }
    out.extend_from_slice(x);
    for m in 1..=pad {
        let q = m.div_ceil(period);
        out.push(x[(n - 1 + m).saturating_sub(q * period)]);
    }
    (out, pad)
}

fn reflect_pad(x: &[f64], pad: usize) -> (Vec<f64>, usize) {
    let pad = pad.min(x.len().saturating_sub(1));
    let mut out = Vec::with_capacity(x.len() + 2 * pad);
    out.extend((1..=pad).rev().map(|i| x[i]));
    out.extend_from_slice(x);
    let n = x.len();
    out.extend((1..=pad).map(|i| x[n - 1 - i]));
    (out, pad)
}

/// Keeps the scales whose dilated wavelet support ends below Nyquist.
pub fn usable_scales(scales: &[f64], fs: f64, wavelet: &MotherWavelet) -> Vec<f64> {
    let nyquist = fs / 2.0;
    let (_, top) = wavelet.support();
    let kept: Vec<f64> = scales.iter().copied().filter(|&a| a > 0.0 && top / a < nyquist).collect();
    if kept.len() < scales.len() {
        log::warn!(
            "excluded {} scale(s) whose wavelet support reaches Nyquist ({nyquist} Hz)",
            scales.len() - kept.len()
        );
    }
    kept
}

/// `W(a, b) = int x(t) a^(-1/2) psi*((t - b) / a) dt`, evaluated as the
/// product of the signal spectrum with `sqrt(a) psi^(a f)` per scale.
pub fn cwt(x: &[f64], fs: f64, scales: &[f64], wavelet: &MotherWavelet, padding: Padding) -> Result<TfPlane> {
    Ok(transform(x, fs, scales, wavelet, padding, false)?.plane)
}

/// Like [`cwt`], also returning the time derivative computed by multiplying
/// the spectrum with `i 2 pi f`.
pub fn cwt_with_derivative(
    x: &[f64],
    fs: f64,
    scales: &[f64],
    wavelet: &MotherWavelet,
    padding: Padding,
) -> Result<Cwt> {
    transform(x, fs, scales, wavelet, padding, true)
}

fn transform(
    x: &[f64],
    fs: f64,
    scales: &[f64],
    wavelet: &MotherWavelet,
    padding: Padding,
    with_deriv: bool,
) -> Result<Cwt> {
    if x.is_empty() || !(fs > 0.0) {
        return Err(Error::InvalidInput("cwt needs a non-empty signal and fs > 0".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("cwt input contains non-finite samples".into()));
    }
    let scales = usable_scales(scales, fs, wavelet);
    let (padded, offset) = match padding {
        Padding::None => (x.to_vec(), 0),
        Padding::Reflect(p) => reflect_pad(x, p),
        Padding::Periodic { len, period } => periodic_pad(x, len, period),
    };
    let n = padded.len();
    let n_out = x.len();

    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut spec: Vec<Complex64> = padded.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut spec);

    let freqs = fft_freqs(n, fs);
    let time_axis: Vec<f64> = (0..n_out).map(|i| i as f64 / fs).collect();
    let row_freq: Vec<f64> = scales.iter().map(|&a| wavelet.freq_of_scale(a)).collect();
    let mut plane = TfPlane::zeros(PlaneKind::Cwt, time_axis.clone(), scales.clone(), row_freq.clone());
    let mut deriv = TfPlane::zeros(PlaneKind::Cwt, time_axis, scales.clone(), row_freq);

    let scale_norm = 1.0 / n as f64;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut dbuf = vec![Complex64::new(0.0, 0.0); n];
    for (r, &a) in scales.iter().enumerate() {
        let amp = a.sqrt();
        for k in 0..n {
            let h = if freqs[k] > 0.0 { amp * wavelet.spectrum(a * freqs[k]) } else { 0.0 };
            buf[k] = spec[k] * h;
            if with_deriv {
                dbuf[k] = buf[k] * Complex64::new(0.0, std::f64::consts::TAU * freqs[k]);
            }
        }
        inv.process(&mut buf);
        let row = &mut plane.values[r * n_out..(r + 1) * n_out];
        for (dst, src) in row.iter_mut().zip(&buf[offset..offset + n_out]) {
            *dst = src * scale_norm;
        }
        if with_deriv {
            inv.process(&mut dbuf);
            let row = &mut deriv.values[r * n_out..(r + 1) * n_out];
            for (dst, src) in row.iter_mut().zip(&dbuf[offset..offset + n_out]) {
                *dst = src * scale_norm;
            }
        }
    }
    Ok(Cwt { plane, deriv })
}
