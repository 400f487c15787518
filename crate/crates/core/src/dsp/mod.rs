//! Filtering and preprocessing primitives.

pub mod filter;
pub mod preprocess;
pub mod smooth;

pub use filter::{design_butter_bandpass, design_butter_lowpass, EdgeMode, IirFilter, Sos};
pub use preprocess::{preprocess_xm, trend, PreprocSignal, DEFAULT_TREND_CUTOFF_HZ};
pub use smooth::{moving_average, odd_window};

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.iter().sum::<f64>() / x.len() as f64
    }
}

/// Median of a slice (average of the middle pair for even lengths).
pub fn median(x: &[f64]) -> Option<f64> {
    if x.is_empty() {
        return None;
    }
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}
