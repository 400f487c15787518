use crate::dsp::{preprocess_xm, PreprocSignal};
use crate::rpeak::{
    elgendi_trace, recover_missed_with_report, refractory_filter, DetectorConfig, ElgendiTrace, PeakList,
    RecoveryReport,
};
use crate::sst::{sst_blocks, SstConfig, SstOutput};
use crate::Result;

/// Everything derived from one ECG lead by the detection chain.
#[derive(Debug, Clone)]
pub struct LeadAnalysis {
    pub fs: f64,
    pub pre: PreprocSignal,
    /// ECG minus its lowpass trend.
    pub ecg: Vec<f64>,
    pub trace: ElgendiTrace,
    /// Detector output after the refractory filter.
    pub base: PeakList,
    pub sst: SstOutput,
    pub recovered: PeakList,
    pub recovery: RecoveryReport,
}

/// Detrend, detect, apply the refractory period, run the blockwise SST on
/// the log envelope with the detected peaks as rate estimates, and recover
/// missed beats from the phase.
pub fn analyze_lead(
    raw: &[f64],
    fs: f64,
    det: &DetectorConfig,
    sst: &SstConfig,
    trend_cutoff: f64,
) -> Result<LeadAnalysis> {
    let pre = preprocess_xm(raw, fs, trend_cutoff)?;
    let ecg = pre.detrended(raw);
    let trace = elgendi_trace(&ecg, fs, det)?;
    let halfwidth = (det.slope_halfwidth * 1e-3 * fs).round() as usize;
    let base = refractory_filter(
        &PeakList::from_base(trace.peaks.clone()),
        &ecg,
        det.refractory_samples(fs),
        halfwidth,
    );
    let sst_out = sst_blocks(&pre.x_m, fs, &base.indices, sst)?;
    let (recovered, recovery) = recover_missed_with_report(&base, &sst_out.estimate, &ecg, fs, det)?;
    Ok(LeadAnalysis {
        fs,
        pre,
        ecg,
        trace,
        base,
        sst: sst_out,
        recovered,
        recovery,
    })
}
