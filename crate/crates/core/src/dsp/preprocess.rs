//! Log-envelope transform fed to the synchrosqueezing stage:
//! `x_m = log(1 + |ecg - T|) - mean(log(1 + |ecg - T|))`, with `T` a
//! zero-phase lowpass trend of the ECG.

use super::filter::{design_butter_lowpass, EdgeMode};
use crate::{Error, Result};

pub const DEFAULT_TREND_CUTOFF_HZ: f64 = 0.5;
const TREND_ORDER: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocSignal {
    pub x_m: Vec<f64>,
    /// Lowpass trend of the ECG, same units as the input.
    pub trend: Vec<f64>,
    /// Mean removed from the log envelope.
    pub mu: f64,
}

impl PreprocSignal {
    /// ECG with its trend removed.
    pub fn detrended(&self, ecg: &[f64]) -> Vec<f64> {
        ecg.iter().zip(&self.trend).map(|(e, t)| e - t).collect()
    }
}

pub fn trend(ecg: &[f64], fs: f64, cutoff: f64) -> Result<Vec<f64>> {
    let lp = design_butter_lowpass(TREND_ORDER, cutoff, fs)?;
    // Pad over a few time constants of the lowpass with mirrored signal.
    let pad = (3.0 * fs / cutoff).ceil() as usize;
    Ok(lp.filtfilt_padded(ecg, pad, EdgeMode::Even))
}

pub fn preprocess_xm(ecg: &[f64], fs: f64, trend_cutoff: f64) -> Result<PreprocSignal> {
    if ecg.is_empty() {
        return Err(Error::InvalidInput("empty ECG".into()));
    }
    let trend = trend(ecg, fs, trend_cutoff)?;
    let env: Vec<f64> = ecg
        .iter()
        .zip(&trend)
        .map(|(e, t)| (e - t).abs().ln_1p())
        .collect();
    let mu = super::mean(&env);
    Ok(PreprocSignal {
        x_m: env.iter().map(|v| v - mu).collect(),
        trend,
        mu,
    })
}
