use crate::{Error, Result};

/// Centered moving average with shrinking windows at the edges.
///
/// `window_len` must be odd; the output has the input's length.
pub fn moving_average(x: &[f64], window_len: usize) -> Result<Vec<f64>> {
    if window_len == 0 || window_len.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "moving average window must be odd and positive, got {window_len}"
        )));
    }
    let half = window_len / 2;
    let n = x.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for v in x {
        acc += v;
        prefix.push(acc);
    }
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect())
}

/// Odd window length closest to `ms` milliseconds at `fs` Hz (at least 1).
pub fn odd_window(ms: f64, fs: f64) -> usize {
    let n = (ms * 1e-3 * fs).round().max(1.0) as usize;
    if n.is_multiple_of(2) {
        n + 1
    } else {
        n
    }
}
