use serde::{Deserialize, Serialize};

use super::{DetectorConfig, PeakList};
use crate::dsp::{design_butter_bandpass, mean, moving_average, odd_window};
use crate::Result;

/// Contiguous run `[start, end)` where the QRS average exceeds the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QrsBlock {
    pub start: usize,
    pub end: usize,
}

impl QrsBlock {
    pub fn width(&self) -> usize {
        self.end - self.start
    }

    pub fn contains(&self, i: usize) -> bool {
        i >= self.start && i < self.end
    }

    /// Samples between `i` and the block (0 inside).
    pub fn distance(&self, i: usize) -> usize {
        if i < self.start {
            self.start - i
        } else if i >= self.end {
            i + 1 - self.end
        } else {
            0
        }
    }
}

/// Intermediate signals of the detector, kept for QRS-width features.
#[derive(Debug, Clone)]
pub struct ElgendiTrace {
    pub squared: Vec<f64>,
    pub ma_qrs: Vec<f64>,
    pub ma_beat: Vec<f64>,
    /// `beta * mean(squared)`.
    pub offset: f64,
    /// Blocks at least one QRS window wide.
    pub blocks: Vec<QrsBlock>,
    /// One peak per block, `argmax |ecg|` inside it.
    pub peaks: Vec<usize>,
}

impl ElgendiTrace {
    /// Block containing `i`, else the nearest one within `max_dist` samples.
    pub fn block_near(&self, i: usize, max_dist: usize) -> Option<QrsBlock> {
        let pos = self.blocks.partition_point(|b| b.end <= i);
        let mut best: Option<QrsBlock> = None;
        for b in self.blocks[pos.saturating_sub(1)..(pos + 2).min(self.blocks.len())].iter() {
            let d = b.distance(i);
            if d <= max_dist && best.is_none_or(|c| d < c.distance(i)) {
                best = Some(*b);
            }
        }
        best
    }
}

/// Bandpass, square, compare a QRS-length moving average against a
/// beat-length one plus an offset, keep blocks at least a QRS window wide and
/// take the largest `|ecg|` in each.
pub fn elgendi_trace(ecg: &[f64], fs: f64, cfg: &DetectorConfig) -> Result<ElgendiTrace> {
    cfg.validate()?;
    let filter = design_butter_bandpass(cfg.filter_order, cfg.band_lo, cfg.band_hi, fs)?;
    let filtered = if ecg.is_empty() { Vec::new() } else { filter.filtfilt(ecg) };
    let squared: Vec<f64> = filtered.iter().map(|v| v * v).collect();
    let w1 = odd_window(cfg.w1, fs);
    let w2 = odd_window(cfg.w2, fs);
    let ma_qrs = moving_average(&squared, w1)?;
    let ma_beat = moving_average(&squared, w2)?;
    let offset = cfg.beta * mean(&squared);

    let mut blocks = Vec::new();
    let mut start = None;
    for i in 0..=squared.len() {
        let on = i < squared.len() && ma_qrs[i] > ma_beat[i] + offset;
        match (on, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if i - s >= w1 {
                    blocks.push(QrsBlock { start: s, end: i });
                }
                start = None;
            }
            _ => {}
        }
    }
    let peaks = blocks
        .iter()
        .map(|b| (b.start..b.end).fold(b.start, |m, i| if ecg[i].abs() > ecg[m].abs() { i } else { m }))
        .collect();
    Ok(ElgendiTrace {
        squared,
        ma_qrs,
        ma_beat,
        offset,
        blocks,
        peaks,
    })
}

pub fn detect_elgendi(ecg: &[f64], fs: f64, cfg: &DetectorConfig) -> Result<PeakList> {
    Ok(PeakList::from_base(elgendi_trace(ecg, fs, cfg)?.peaks))
}
