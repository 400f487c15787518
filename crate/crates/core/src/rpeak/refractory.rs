use super::{PeakList, PeakSource};

/// Largest absolute first difference of `ecg` within `halfwidth` samples of `i`.
pub fn slope_at(ecg: &[f64], i: usize, halfwidth: usize) -> f64 {
    let lo = i.saturating_sub(halfwidth).max(1);
    let hi = (i + halfwidth).min(ecg.len().saturating_sub(1));
    (lo..=hi).map(|k| (ecg[k] - ecg[k - 1]).abs()).fold(0.0, f64::max)
}

/// Enforces a minimum gap of `refractory` samples: of two peaks closer than
/// that, the one on the steeper deflection survives (the earlier on a tie).
/// The result has no violations, so applying it again changes nothing.
pub fn refractory_filter(peaks: &PeakList, ecg: &[f64], refractory: usize, slope_halfwidth: usize) -> PeakList {
    let mut kept: Vec<(usize, PeakSource, f64)> = Vec::with_capacity(peaks.len());
    let mut order: Vec<usize> = (0..peaks.len()).collect();
    order.sort_by_key(|&k| peaks.indices[k]);
    for k in order {
        let i = peaks.indices[k];
        let slope = slope_at(ecg, i, slope_halfwidth);
        let mut keep = true;
        while let Some(&(last, _, last_slope)) = kept.last() {
            if i - last >= refractory {
                break;
            }
            if slope > last_slope {
                kept.pop();
            } else {
                keep = false;
                break;
            }
        }
        if keep {
            kept.push((i, peaks.source[k], slope));
        }
    }
    PeakList {
        indices: kept.iter().map(|k| k.0).collect(),
        source: kept.iter().map(|k| k.1).collect(),
    }
}
