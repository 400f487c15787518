use std::ops::Range;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::sst::{band_component, bin_of, TfPlane};
use crate::{Error, Result};

/// Per-beat integrals of the amplitudes of the components reconstructed
/// around 1x, 2x, ... Dx the fundamental ridge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZIndex {
    pub z: Vec<f64>,
    /// D asked for; `z.len()` is smaller when upper harmonics left the plane.
    pub requested: usize,
}

/// Highest harmonic whose band `l * max(ridge) + halfwidth bins` still fits
/// below both the plane's top row and Nyquist.
pub fn max_harmonic(s: &TfPlane, ridge_freq: &[f64], halfwidth: usize, fs: f64) -> usize {
    let f_max = ridge_freq.iter().cloned().fold(0.0f64, f64::max);
    if !(f_max > 0.0) || s.n_rows < 2 {
        return 0;
    }
    let dxi = s.row_freq[1] - s.row_freq[0];
    let top = s.row_freq[s.n_rows - 1].min(fs / 2.0) - halfwidth as f64 * dxi;
    (top / f_max).floor().max(0.0) as usize
}

/// `z_l = sum over the beat of |B_l(t)| / fs`, with `B_l` reconstructed from
/// `s` over `l * ridge_freq[t] +- halfwidth` bins.
pub fn z_index(
    s: &TfPlane,
    ridge_freq: &[f64],
    interval: Range<usize>,
    d: usize,
    halfwidth: usize,
    r_psi: f64,
    fs: f64,
) -> Result<ZIndex> {
    if d == 0 {
        return Err(Error::InvalidInput("Z-index needs D >= 1".into()));
    }
    if ridge_freq.len() != s.n_cols || interval.end > s.n_cols || interval.start >= interval.end {
        return Err(Error::InvalidInput(format!(
            "beat interval {interval:?} does not fit a plane with {} columns",
            s.n_cols
        )));
    }
    let d_eff = d.min(max_harmonic(s, ridge_freq, halfwidth, fs));
    if d_eff < d {
        warn!("Z-index truncated from D={d} to D={d_eff}: upper harmonics fall outside the plane");
    }
    let mut z = Vec::with_capacity(d_eff);
    for l in 1..=d_eff {
        let centers: Vec<usize> = ridge_freq.iter().map(|&f| bin_of(s, l as f64 * f)).collect();
        let comp = band_component(s, &centers, halfwidth, r_psi)?;
        z.push(comp[interval.clone()].iter().map(|c| c.norm()).sum::<f64>() / fs);
    }
    Ok(ZIndex { z, requested: d })
}
