use sstecg::dsp::DEFAULT_TREND_CUTOFF_HZ;
use sstecg::pipeline::analyze_lead;
use sstecg::rpeak::{
    cycle_intervals, detect_elgendi, recover_missed, score_detection, DetectorConfig, PeakSource,
};
use sstecg::sst::SstConfig;
use sstecg::synth::{generate, AnhSpec, BeatOverride, GroundTruth, PhaseSpec};

const FS: f64 = 360.0;

/// ECG-like beats at `rate` Hz, starting half a cycle before the first R-peak.
fn ecg_spec(rate: f64) -> AnhSpec {
    AnhSpec {
        phase: PhaseSpec::Constant { freq: rate, offset: 0.5 },
        ..AnhSpec::ecg(rate)
    }
}

fn run(g: &GroundTruth) -> sstecg::pipeline::LeadAnalysis {
    analyze_lead(&g.signal, FS, &DetectorConfig::default(), &SstConfig::default(), DEFAULT_TREND_CUTOFF_HZ).unwrap()
}

#[test]
fn ten_clean_beats() {
    let g = generate(&ecg_spec(1.2), FS, 8.5, 0).unwrap();
    assert_eq!(g.true_peaks.len(), 10);
    let p = detect_elgendi(&g.signal, FS, &DetectorConfig::default()).unwrap();
    assert_eq!(p.len(), 10);
    let tol = (0.020 * FS) as usize;
    for (d, t) in p.indices.iter().zip(&g.true_peaks) {
        assert!(d.abs_diff(*t) <= tol, "{d} vs {t}");
    }
}

#[test]
fn one_peak_per_phase_cycle() {
    let g = generate(&ecg_spec(1.2), FS, 60.0, 0).unwrap();
    let a = run(&g);
    let cycles = cycle_intervals(&a.sst.estimate.phase);
    assert!(cycles.len() >= 70);
    for (s, e, r) in &cycles {
        let n = a.recovered.indices.iter().filter(|&&i| i >= *s && i < *e).count();
        assert_eq!(n, 1, "cycle {r} [{s}, {e})");
    }
    let score = score_detection(&a.recovered.indices, &g.true_peaks, 54);
    assert_eq!((score.fn_, score.fp), (0, 0));

    let z: Vec<f64> = a.recovered.indices.iter().map(|&i| {
        let p = a.sst.estimate.phase[i];
        p - p.round()
    }).collect();
    let m = z.iter().sum::<f64>() / z.len() as f64;
    let sd = (z.iter().map(|v| (v - m).powi(2)).sum::<f64>() / z.len() as f64).sqrt();
    assert!(sd <= 0.02, "std(zeta) = {sd}");
}

#[test]
fn nothing_to_recover_leaves_peaks_alone() {
    let g = generate(&ecg_spec(1.1), FS, 40.0, 0).unwrap();
    let a = run(&g);
    assert_eq!(a.base, a.recovered);
    let again = recover_missed(&a.recovered, &a.sst.estimate, &a.ecg, FS, &DetectorConfig::default()).unwrap();
    assert_eq!(again, a.recovered);
}

#[test]
fn widened_beat_is_recovered() {
    // One beat with broad, low-frequency QRS bumps: the detector's 8-20 Hz
    // energy misses it, but its height clears TH1 and it sits at the
    // expected phase.
    let mut spec = ecg_spec(1.2);
    spec.overrides = vec![BeatOverride { cycle: 30, amplitude_scale: 1.2, width_scale: 6.0, phase_shift: 0.0 }];
    let g = generate(&spec, FS, 60.0, 0).unwrap();
    let target = g.true_peaks[29];
    let a = run(&g);
    let tol = 54;
    assert!(a.base.indices.iter().all(|i| i.abs_diff(target) > tol), "detector already finds it");
    let hit = a.recovered.indices.iter().position(|i| i.abs_diff(target) <= tol).expect("not recovered");
    assert_eq!(a.recovered.source[hit], PeakSource::Recovered);
    assert_eq!(a.recovered.recovered_count(), 1);
    let score = score_detection(&a.recovered.indices, &g.true_peaks, tol);
    assert_eq!((score.fn_, score.fp), (0, 0));
}

#[test]
fn recovery_keeps_base_peaks_and_gaps() {
    let spec = AnhSpec {
        phase: PhaseSpec::SinusoidalFm { f0: 1.2, deviation: 0.15, rate: 0.05, offset: 0.3 },
        epsilon: 0.05,
        ..ecg_spec(1.2)
    }
    .with_noise(0.0025);
    let g = generate(&spec, FS, 90.0, 5).unwrap();
    let a = run(&g);
    let refr = DetectorConfig::default().refractory_samples(FS);
    assert!(a.recovered.min_gap().is_none_or(|gap| gap >= refr));
    assert!(a.base.indices.iter().all(|i| a.recovered.indices.contains(i)));
    let base = score_detection(&a.base.indices, &g.true_peaks, 54);
    let score = score_detection(&a.recovered.indices, &g.true_peaks, 54);
    assert!(score.fn_ <= base.fn_);
    assert!(score.fp <= base.fp + a.recovered.recovered_count());
    assert!(score.se() > 0.99 && score.ppv() > 0.99, "{score:?}");
}
