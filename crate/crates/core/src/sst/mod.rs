//! Synchrosqueezing transform: bump-wavelet CWT, reassignment, squeezing onto
//! a linear frequency grid, ridge tracking, component reconstruction and
//! blockwise analysis of long records.

mod blocks;
mod cwt;
mod plane;
mod reconstruct;
mod ridge;
mod squeeze;
mod wavelet;

use serde::{Deserialize, Serialize};

pub use blocks::{block_iff, block_starts, sst_blocks, sst_segment, BlockInfo, SegmentOutput, SstOutput};
pub use cwt::{cwt, cwt_with_derivative, usable_scales, Cwt, Padding};
pub use plane::{PlaneKind, TfPlane, DUMP_VERSION};
pub use reconstruct::{band_component, phase_of, reconstruct, reconstruct_full, PhaseEstimate};
pub use ridge::{band_rows, bin_of, extract_ridge, extract_ridge_with_penalty, Ridge};
pub use squeeze::{linear_bins, reassign, squeeze, Gamma, ReassignmentField, SqueezeStats};
pub use wavelet::{log_scales, MotherWavelet};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SstConfig {
    pub voices: usize,
    pub n_bins: usize,
    pub gamma_relative: f64,
    pub gamma_absolute: f64,
    pub block_len: usize,
    pub overlap: f64,
    /// Wavelet half-support as a fraction of IFF.
    pub sigma_ratio: f64,
    /// Ridge band half-width as a fraction of IFF.
    pub band_ratio: f64,
    /// Frequencies analysed span `[IFF / range_ratio, IFF * range_ratio]`.
    pub range_ratio: f64,
    pub halfwidth_bins: usize,
    /// Samples added at each end of a block before the CWT, copied from whole
    /// beat periods inside the block.
    pub pad: usize,
    /// Hz, used when the first block has fewer than two rough peaks.
    pub fallback_iff: f64,
}

impl Default for SstConfig {
    fn default() -> Self {
        SstConfig {
            voices: 32,
            n_bins: 512,
            gamma_relative: 1e-8,
            gamma_absolute: 0.0,
            block_len: 4096,
            overlap: 0.5,
            sigma_ratio: 0.8,
            band_ratio: 0.3,
            range_ratio: 4.0,
            halfwidth_bins: 3,
            pad: 1024,
            fallback_iff: 1.2,
        }
    }
}

impl SstConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.block_len.is_power_of_two() {
            return Err(Error::InvalidInput(format!("block length {} is not a power of two", self.block_len)));
        }
        if !(0.0..=0.9).contains(&self.overlap) {
            return Err(Error::InvalidInput(format!("overlap {} outside [0, 0.9]", self.overlap)));
        }
        if self.voices == 0 || self.n_bins < 2 {
            return Err(Error::InvalidInput("need at least one voice and two bins".into()));
        }
        if !(self.range_ratio > 1.0 && self.sigma_ratio > 0.0 && self.sigma_ratio < 1.0) {
            return Err(Error::InvalidInput("invalid wavelet or range ratio".into()));
        }
        Ok(())
    }
}
