use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cwt::{cwt_with_derivative, Padding};
use super::plane::TfPlane;
use super::reconstruct::{reconstruct, PhaseEstimate};
use super::ridge::{extract_ridge, Ridge};
use super::squeeze::{linear_bins, reassign, squeeze, Gamma, SqueezeStats};
use super::wavelet::{log_scales, MotherWavelet};
use super::SstConfig;
use crate::dsp::median;
use crate::{Error, Result};

/// Everything produced for one segment analysed at a fixed IFF.
#[derive(Debug, Clone)]
pub struct SegmentOutput {
    pub iff: f64,
    pub wavelet: MotherWavelet,
    pub plane: TfPlane,
    pub ridge: Ridge,
    pub estimate: PhaseEstimate,
    pub stats: SqueezeStats,
}

/// Runs CWT, reassignment, squeezing, ridge tracking and reconstruction on
/// one segment with the wavelet centered on `iff`.
pub fn sst_segment(x: &[f64], fs: f64, iff: f64, cfg: &SstConfig) -> Result<SegmentOutput> {
    if !(iff > 0.0) {
        return Err(Error::InvalidInput(format!("IFF must be positive, got {iff}")));
    }
    let wavelet = MotherWavelet::for_iff(iff, cfg.sigma_ratio)?;
    let f_lo = iff / cfg.range_ratio;
    let f_hi = iff * cfg.range_ratio;
    let scales = log_scales(&wavelet, f_lo, f_hi, cfg.voices)?;
    let period = (fs / iff).round() as usize;
    let padding = Padding::Periodic { len: cfg.pad, period };
    let cwt = cwt_with_derivative(x, fs, &scales, &wavelet, padding)?;
    let field = reassign(
        &cwt,
        Gamma {
            relative: cfg.gamma_relative,
            absolute: cfg.gamma_absolute,
        },
    );
    let bins = linear_bins(f_lo, f_hi, cfg.n_bins);
    let (plane, stats) = squeeze(&cwt, &field, &bins)?;
    drop(cwt);
    let ridge = extract_ridge(&plane, iff, cfg.band_ratio * iff)?;
    let estimate = reconstruct(&plane, &ridge.bins, cfg.halfwidth_bins, wavelet.admissibility(), fs)?;
    Ok(SegmentOutput {
        iff,
        wavelet,
        plane,
        ridge,
        estimate,
        stats,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockInfo {
    pub start: usize,
    pub len: usize,
    pub iff: f64,
    /// Whether the IFF came from an earlier block or the fallback.
    pub iff_inherited: bool,
    pub dropped: usize,
}

#[derive(Debug, Clone)]
pub struct SstOutput {
    pub estimate: PhaseEstimate,
    pub blocks: Vec<BlockInfo>,
    /// Phase jump (cycles, net of the expected advance) at each seam.
    pub seam_jumps: Vec<f64>,
}

/// Block start offsets: regular hops, with the last block aligned to the end.
pub fn block_starts(n: usize, block_len: usize, overlap: f64) -> Vec<usize> {
    if n <= block_len {
        return vec![0];
    }
    let hop = ((block_len as f64 * (1.0 - overlap)).round() as usize).max(1);
    let mut starts = Vec::new();
    let mut s = 0;
    while s + block_len < n {
        starts.push(s);
        s += hop;
    }
    starts.push(n - block_len);
    starts.dedup();
    starts
}

/// Median of `1 / RR` over the peaks falling in `[start, end)`.
pub fn block_iff(peaks: &[usize], start: usize, end: usize, fs: f64) -> Option<f64> {
    let inside: Vec<usize> = peaks.iter().copied().filter(|&p| p >= start && p < end).collect();
    if inside.len() < 2 {
        return None;
    }
    let rates: Vec<f64> = inside
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| fs / (w[1] - w[0]) as f64)
        .collect();
    median(&rates)
}

/// Blockwise analysis of a whole record. Each block gets its own IFF from the
/// rough peaks; blocks run in parallel and are then stitched in order: every
/// sample takes its phase from the block whose center is nearest, each block's
/// phase is shifted by the whole number of cycles that best matches its
/// predecessor at the seam, and amplitudes are cross-faded over overlaps.
pub fn sst_blocks(x: &[f64], fs: f64, rough_peaks: &[usize], cfg: &SstConfig) -> Result<SstOutput> {
    cfg.validate()?;
    if x.is_empty() {
        return Err(Error::InvalidInput("empty signal".into()));
    }
    let n = x.len();
    let starts = block_starts(n, cfg.block_len, cfg.overlap);
    let mut infos = Vec::with_capacity(starts.len());
    let mut prev_iff: Option<f64> = None;
    for &s in &starts {
        let len = cfg.block_len.min(n - s);
        let (iff, inherited) = match block_iff(rough_peaks, s, s + len, fs) {
            Some(f) => (f, false),
            None => (prev_iff.unwrap_or(cfg.fallback_iff), true),
        };
        prev_iff = Some(iff);
        infos.push(BlockInfo {
            start: s,
            len,
            iff,
            iff_inherited: inherited,
            dropped: 0,
        });
    }

    let estimates: Vec<Result<(PhaseEstimate, usize)>> = infos
        .par_iter()
        .map(|b| {
            let seg = sst_segment(&x[b.start..b.start + b.len], fs, b.iff, cfg)?;
            Ok((seg.estimate, seg.stats.dropped))
        })
        .collect();
    let mut parts = Vec::with_capacity(estimates.len());
    for (info, r) in infos.iter_mut().zip(estimates) {
        let (est, dropped) = r?;
        info.dropped = dropped;
        parts.push(est);
    }

    let (estimate, seam_jumps) = stitch(&infos, &parts, n, fs);
    Ok(SstOutput {
        estimate,
        blocks: infos,
        seam_jumps,
    })
}

fn stitch(infos: &[BlockInfo], parts: &[PhaseEstimate], n: usize, fs: f64) -> (PhaseEstimate, Vec<f64>) {
    let mut out = PhaseEstimate {
        fs,
        amplitude: vec![0.0; n],
        phase: vec![0.0; n],
        ridge_freq: vec![0.0; n],
        block: vec![0; n],
        undefined: vec![false; n],
    };
    // Seams where ownership passes to the next block (nearer center).
    let centers: Vec<f64> = infos.iter().map(|b| b.start as f64 + (b.len as f64 - 1.0) / 2.0).collect();
    let mut seams = Vec::with_capacity(infos.len().saturating_sub(1));
    for i in 0..infos.len().saturating_sub(1) {
        let mid = (centers[i] + centers[i + 1]) / 2.0;
        seams.push((mid.floor() as usize + 1).clamp(infos[i + 1].start, infos[i].start + infos[i].len));
    }

    let mut offsets = vec![0.0; infos.len()];
    let mut jumps = Vec::new();
    let mut seg_start = 0;
    for (i, (info, part)) in infos.iter().zip(parts).enumerate() {
        let seg_end = if i < seams.len() { seams[i] } else { n };
        if i > 0 {
            let s = seg_start;
            let prev = &parts[i - 1];
            let prev_info = &infos[i - 1];
            let local_prev = prev.phase[s - prev_info.start] + offsets[i - 1];
            let local_here = part.phase[s - info.start];
            offsets[i] = (local_prev - local_here).round();
            let before = out.phase[s - 1];
            let expected = part.ridge_freq[s - info.start] / fs;
            jumps.push(local_here + offsets[i] - before - expected);
        }
        let offset = offsets[i];
        for t in seg_start..seg_end {
            let k = t - info.start;
            out.phase[t] = part.phase[k] + offset;
            out.ridge_freq[t] = part.ridge_freq[k];
            out.undefined[t] = part.undefined[k];
            out.block[t] = i as u32;
        }
        seg_start = seg_end;
    }

    // Triangular weights per block give a linear cross-fade across overlaps.
    let mut weight = vec![0.0; n];
    for (info, part) in infos.iter().zip(parts) {
        for k in 0..info.len {
            let w = ((k as f64 + 0.5).min(info.len as f64 - k as f64 - 0.5)).max(1e-3);
            out.amplitude[info.start + k] += w * part.amplitude[k];
            weight[info.start + k] += w;
        }
    }
    for (a, w) in out.amplitude.iter_mut().zip(&weight) {
        *a /= w;
    }
    (out, jumps)
}
