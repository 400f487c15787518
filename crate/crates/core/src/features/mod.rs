//! Per-beat features: relative SST phase at the R-peak, R amplitude, RR
//! timings, QRS width from the detector, and the harmonic Z-index.

mod table;
mod zindex;

use serde::{Deserialize, Serialize};

pub use table::{read_features_csv, write_features_csv, FEATURE_NAMES};
pub use zindex::{z_index, ZIndex};

use crate::rpeak::ElgendiTrace;
use crate::sst::PhaseEstimate;
use crate::wfdb::AamiClass;

/// Shortest and longest QRS duration reported, seconds.
pub const QRS_RANGE: (f64, f64) = (0.040, 0.200);
/// A detector block this close to a beat (seconds) still counts as its QRS.
pub const QRS_SEARCH: f64 = 0.100;
/// Trailing RR intervals averaged in `rr_mean10`.
pub const RR_HISTORY: usize = 10;
/// Records with fewer beats yield no features.
pub const MIN_BEATS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeatFeatures {
    pub record_id: String,
    /// Sample index of the R-peak.
    pub beat_index: usize,
    /// Relative phase, cycles in (-1/2, 1/2].
    pub zeta: f64,
    pub r_amp: f64,
    /// Seconds.
    pub rr_prev: f64,
    pub rr_next: f64,
    pub rr_mean10: f64,
    pub qrs_dur: f64,
    pub label: Option<AamiClass>,
}

impl BeatFeatures {
    pub fn vector(&self) -> [f64; 6] {
        [self.zeta, self.r_amp, self.rr_prev, self.rr_next, self.rr_mean10, self.qrs_dur]
    }
}

/// Relative phase `phi - round(phi)` in (-1/2, 1/2] at each peak; `None` where
/// the peak lies outside the estimate or the phase is undefined.
pub fn phase_at_peaks(phase: &PhaseEstimate, peaks: &[usize]) -> Vec<Option<f64>> {
    peaks
        .iter()
        .map(|&p| {
            if p >= phase.len() || phase.undefined[p] {
                None
            } else {
                Some(relative_phase(phase.phase[p]))
            }
        })
        .collect()
}

pub fn relative_phase(phi: f64) -> f64 {
    let z = phi - (phi - 0.5).ceil();
    if z <= -0.5 {
        z + 1.0
    } else {
        z
    }
}

/// Width in seconds of the detector block holding `peak` (or the nearest one
/// within [`QRS_SEARCH`]), clamped to [`QRS_RANGE`]. Beats the detector never
/// flagged get the lower bound.
pub fn qrs_duration(trace: &ElgendiTrace, peak: usize, fs: f64) -> f64 {
    let reach = (QRS_SEARCH * fs).round() as usize;
    let width = trace.block_near(peak, reach).map_or(0, |b| b.width());
    (width as f64 / fs).clamp(QRS_RANGE.0, QRS_RANGE.1)
}

/// Inputs shared by every beat of one lead.
pub struct LeadContext<'a> {
    pub record_id: &'a str,
    pub fs: f64,
    /// ECG minus its lowpass trend.
    pub ecg: &'a [f64],
    pub phase: &'a PhaseEstimate,
    pub trace: &'a ElgendiTrace,
}

/// Six features per beat. `peaks` are all beats of the record in order (RR
/// intervals use every one of them); `labels[i]` is `None` for beats that
/// should not produce a row. Beats without a previous and next neighbour,
/// the first [`RR_HISTORY`] beats and beats with undefined phase are left out.
pub fn beat_features(ctx: &LeadContext, peaks: &[usize], labels: &[Option<AamiClass>]) -> Vec<BeatFeatures> {
    assert_eq!(peaks.len(), labels.len(), "one label slot per peak");
    if peaks.len() < MIN_BEATS {
        return Vec::new();
    }
    let zetas = phase_at_peaks(ctx.phase, peaks);
    let rr: Vec<f64> = peaks.windows(2).map(|w| (w[1] as f64 - w[0] as f64) / ctx.fs).collect();
    let mut out = Vec::new();
    for i in RR_HISTORY..peaks.len() - 1 {
        let Some(label) = labels[i] else { continue };
        let Some(zeta) = zetas[i] else { continue };
        let p = peaks[i];
        if p >= ctx.ecg.len() {
            continue;
        }
        // rr_prev of beat k is rr[k - 1]; average beats i-9..=i.
        let trailing = &rr[i - RR_HISTORY..i];
        out.push(BeatFeatures {
            record_id: ctx.record_id.to_string(),
            beat_index: p,
            zeta,
            r_amp: ctx.ecg[p],
            rr_prev: rr[i - 1],
            rr_next: rr[i],
            rr_mean10: trailing.iter().sum::<f64>() / RR_HISTORY as f64,
            qrs_dur: qrs_duration(ctx.trace, p, ctx.fs),
            label: Some(label),
        });
    }
    out
}
