//! R-peak detection: two-moving-average detector, refractory filtering,
//! phase-guided recovery of missed beats and beat-by-beat scoring.

mod detector;
mod recovery;
mod refractory;
mod score;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use detector::{detect_elgendi, elgendi_trace, ElgendiTrace, QrsBlock};
pub use recovery::{cycle_intervals, recover_missed, recover_missed_with_report, RecoveryReport};
pub use refractory::{refractory_filter, slope_at};
pub use score::{score_detection, DetectionScore};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    /// QRS window, ms.
    pub w1: f64,
    /// Beat window, ms.
    pub w2: f64,
    /// Threshold offset as a fraction of the mean squared filtered signal.
    pub beta: f64,
    /// ms.
    pub refractory: f64,
    /// TH1 factor.
    pub recovery_scale: f64,
    /// Shortest phase cycle searched for a missed beat, ms.
    pub min_gap: f64,
    pub band_lo: f64,
    pub band_hi: f64,
    pub filter_order: usize,
    /// Half-width of the slope neighbourhood for refractory decisions, ms.
    pub slope_halfwidth: f64,
    /// Peaks used for TH1.
    pub th1_peaks: usize,
    /// Confirmed peaks whose median relative phase is the expected one.
    pub phase_history: usize,
    /// Allowed circular distance from the expected phase, cycles.
    pub phase_tolerance: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            w1: 97.0,
            w2: 611.0,
            beta: 0.08,
            refractory: 250.0,
            recovery_scale: 0.7,
            min_gap: 200.0,
            band_lo: 8.0,
            band_hi: 20.0,
            filter_order: 3,
            slope_halfwidth: 25.0,
            th1_peaks: 4,
            phase_history: 8,
            phase_tolerance: 0.25,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.w1 > 0.0 && self.w1 < self.w2) {
            return Err(Error::InvalidInput(format!("need 0 < w1 < w2, got {} and {}", self.w1, self.w2)));
        }
        if !(self.refractory > 0.0) {
            return Err(Error::InvalidInput("refractory period must be positive".into()));
        }
        if self.th1_peaks == 0 || self.phase_history == 0 {
            return Err(Error::InvalidInput("peak histories must be non-empty".into()));
        }
        Ok(())
    }

    pub fn refractory_samples(&self, fs: f64) -> usize {
        (self.refractory * 1e-3 * fs).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeakSource {
    Base,
    Recovered,
}

impl PeakSource {
    pub fn as_str(self) -> &'static str {
        match self {
            PeakSource::Base => "base",
            PeakSource::Recovered => "recovered",
        }
    }
}

/// Sorted sample indices of detected R-peaks with where each came from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeakList {
    pub indices: Vec<usize>,
    pub source: Vec<PeakSource>,
}

impl PeakList {
    pub fn from_base(indices: Vec<usize>) -> Self {
        let source = vec![PeakSource::Base; indices.len()];
        PeakList { indices, source }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn recovered_count(&self) -> usize {
        self.source.iter().filter(|&&s| s == PeakSource::Recovered).count()
    }

    pub fn min_gap(&self) -> Option<usize> {
        self.indices.windows(2).map(|w| w[1] - w[0]).min()
    }

    /// Writes `sample_index,time_s,source` rows.
    pub fn write_csv(&self, path: &Path, fs: f64) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["sample_index", "time_s", "source"])?;
        for (&i, s) in self.indices.iter().zip(&self.source) {
            w.write_record(&[i.to_string(), format!("{:.6}", i as f64 / fs), s.as_str().to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}
