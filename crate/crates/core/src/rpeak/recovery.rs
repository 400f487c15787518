use serde::{Deserialize, Serialize};

use super::refractory::refractory_filter;
use super::{DetectorConfig, PeakList, PeakSource};
use crate::dsp::median;
use crate::sst::PhaseEstimate;
use crate::{Error, Result};

/// Phase cycles `[start, end)` over which `round(phase)` stays at `r`. The
/// boundaries are where the wrapped phase jumps from +1/2 to -1/2 cycle, so a
/// beat at relative phase near 0 sits inside its interval. Incomplete cycles
/// at either end are left out.
pub fn cycle_intervals(phase: &[f64]) -> Vec<(usize, usize, i64)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for i in 1..phase.len() {
        let (a, b) = (phase[i - 1].round() as i64, phase[i].round() as i64);
        if a != b {
            if let Some(s) = start {
                out.push((s, i, a));
            }
            start = Some(i);
        }
    }
    out
}

/// Relative phase in (-1/2, 1/2] cycles.
pub(crate) fn wrap_cycles(x: f64) -> f64 {
    let w = x - x.round();
    if w <= -0.5 {
        w + 1.0
    } else {
        w
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub empty_cycles: usize,
    pub inserted: usize,
    pub too_short: usize,
    pub no_history: usize,
    pub below_th1: usize,
    pub off_phase: usize,
    pub too_close: usize,
    /// The median peak amplitude was negative, so the search ran on `-ecg`.
    pub inverted: bool,
}

pub fn recover_missed(
    peaks: &PeakList,
    phase: &PhaseEstimate,
    ecg: &[f64],
    fs: f64,
    cfg: &DetectorConfig,
) -> Result<PeakList> {
    Ok(recover_missed_with_report(peaks, phase, ecg, fs, cfg)?.0)
}

/// Searches every phase cycle without a peak. A cycle longer than `min_gap`
/// gets its largest sample as a candidate, accepted when it exceeds
/// `TH1 = recovery_scale * (median ecg at the last 4 peaks - median ecg over
/// their span)`, its relative phase is within `phase_tolerance` of the
/// running median over recent peaks, and it is at least a refractory period
/// from its neighbours. Existing peaks are never removed.
pub fn recover_missed_with_report(
    peaks: &PeakList,
    phase: &PhaseEstimate,
    ecg: &[f64],
    fs: f64,
    cfg: &DetectorConfig,
) -> Result<(PeakList, RecoveryReport)> {
    cfg.validate()?;
    if phase.len() != ecg.len() {
        return Err(Error::InvalidInput(format!(
            "phase covers {} samples but the ECG has {}",
            phase.len(),
            ecg.len()
        )));
    }
    let mut report = RecoveryReport::default();
    let mut list: Vec<(usize, PeakSource)> = peaks.indices.iter().copied().zip(peaks.source.iter().copied()).collect();
    if list.is_empty() {
        return Ok((peaks.clone(), report));
    }
    let amps: Vec<f64> = list.iter().map(|&(i, _)| ecg[i]).collect();
    let polarity = if median(&amps).unwrap_or(0.0) < 0.0 { -1.0 } else { 1.0 };
    report.inverted = polarity < 0.0;
    let sig = |i: usize| polarity * ecg[i];

    let min_len = (cfg.min_gap * 1e-3 * fs).round() as usize;
    let refractory = cfg.refractory_samples(fs);
    for (s, e, _) in cycle_intervals(&phase.phase) {
        let pos = list.partition_point(|&(i, _)| i < s);
        if pos < list.len() && list[pos].0 < e {
            continue;
        }
        report.empty_cycles += 1;
        if e - s <= min_len {
            report.too_short += 1;
            continue;
        }
        if pos < cfg.th1_peaks {
            report.no_history += 1;
            continue;
        }
        let recent = &list[pos - cfg.th1_peaks..pos];
        let at_peaks: Vec<f64> = recent.iter().map(|&(i, _)| sig(i)).collect();
        let span: Vec<f64> = (recent[0].0..=recent[recent.len() - 1].0).map(sig).collect();
        let th1 = cfg.recovery_scale * (median(&at_peaks).unwrap_or(0.0) - median(&span).unwrap_or(0.0));
        let p = (s..e).fold(s, |m, i| if sig(i) > sig(m) { i } else { m });
        if sig(p) <= th1 {
            report.below_th1 += 1;
            continue;
        }

        let hist = &list[pos.saturating_sub(cfg.phase_history)..pos];
        let zetas: Vec<f64> = hist.iter().map(|&(i, _)| wrap_cycles(phase.phase[i])).collect();
        let expected = circular_median(&zetas);
        let zeta_p = wrap_cycles(phase.phase[p]);
        if wrap_cycles(zeta_p - expected).abs() >= cfg.phase_tolerance {
            report.off_phase += 1;
            continue;
        }
        let prev_ok = pos == 0 || p - list[pos - 1].0 >= refractory;
        let next_ok = pos == list.len() || list[pos].0 - p >= refractory;
        if !(prev_ok && next_ok) {
            report.too_close += 1;
            continue;
        }
        list.insert(pos, (p, PeakSource::Recovered));
        report.inserted += 1;
    }
    let out = PeakList {
        indices: list.iter().map(|p| p.0).collect(),
        source: list.iter().map(|p| p.1).collect(),
    };
    let halfwidth = (cfg.slope_halfwidth * 1e-3 * fs).round() as usize;
    Ok((refractory_filter(&out, ecg, refractory, halfwidth), report))
}

/// Median of phases in cycles, taken after unwrapping around the first one.
fn circular_median(z: &[f64]) -> f64 {
    let base = z[0];
    let rel: Vec<f64> = z.iter().map(|v| wrap_cycles(v - base)).collect();
    wrap_cycles(base + median(&rel).unwrap_or(0.0))
}
