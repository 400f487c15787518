//! Ingestion of MIT-BIH style records: WFDB headers, format 212 signals,
//! MIT binary annotations, plus a CSV fallback reader.

pub mod aami;
pub mod annotation;
pub mod csv_record;
pub mod format212;
pub mod header;
pub mod split;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

pub use aami::{is_beat_symbol, map_beat_class, AamiClass};
pub use annotation::Annotation;
pub use header::{Header, SignalSpec};
pub use split::{split_ds, DatasetSplit, RecordSummary};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Lead {
    pub name: String,
    /// Physical units (millivolts for MIT-BIH).
    pub samples: Vec<f64>,
}

/// Which channel of a two-lead record to analyse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LeadRole {
    /// The limb lead (MLII where present).
    Primary,
    /// The precordial lead.
    Secondary,
}

#[derive(Debug, Clone)]
pub struct EcgRecord {
    pub record_id: String,
    pub fs: f64,
    pub leads: Vec<Lead>,
    pub annotations: Vec<Annotation>,
}

impl EcgRecord {
    /// Builds a record, checking that leads share one length, `fs > 0`, and
    /// annotations are ordered and inside the signal.
    pub fn new(
        record_id: impl Into<String>,
        fs: f64,
        leads: Vec<Lead>,
        annotations: Vec<Annotation>,
    ) -> Result<Self> {
        let record_id = record_id.into();
        if !(fs > 0.0) {
            return Err(Error::InvalidInput(format!("{record_id}: fs must be positive")));
        }
        if let Some(first) = leads.first() {
            if leads.iter().any(|l| l.samples.len() != first.samples.len()) {
                return Err(Error::InvalidInput(format!(
                    "{record_id}: leads have unequal lengths"
                )));
            }
        }
        let len = leads.first().map_or(0, |l| l.samples.len());
        let rec = EcgRecord {
            record_id,
            fs,
            leads,
            annotations,
        };
        rec.check_annotations(len)?;
        Ok(rec)
    }

    fn check_annotations(&self, len: usize) -> Result<()> {
        let path = PathBuf::from(&self.record_id);
        if let Some(a) = self.annotations.iter().find(|a| a.sample_index >= len) {
            return Err(Error::AnnotationOutOfRange {
                path,
                index: a.sample_index,
                len,
            });
        }
        let beats: Vec<usize> = self.beat_indices();
        if beats.windows(2).any(|w| w[1] <= w[0])
            || self
                .annotations
                .windows(2)
                .any(|w| w[1].sample_index < w[0].sample_index)
        {
            return Err(Error::MalformedAnnotation {
                path,
                reason: "annotation times are not increasing".into(),
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.leads.first().map_or(0, |l| l.samples.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.fs
    }

    pub fn beats(&self) -> impl Iterator<Item = &Annotation> {
        self.annotations.iter().filter(|a| a.is_beat())
    }

    pub fn beat_indices(&self) -> Vec<usize> {
        self.beats().map(|a| a.sample_index).collect()
    }

    /// Channel index for a lead role. The primary lead is the channel named
    /// `MLII` when present, otherwise channel 0.
    pub fn lead_index(&self, role: LeadRole) -> Option<usize> {
        let primary = self
            .leads
            .iter()
            .position(|l| l.name == "MLII")
            .unwrap_or(0);
        match role {
            LeadRole::Primary => (primary < self.leads.len()).then_some(primary),
            LeadRole::Secondary => (0..self.leads.len()).find(|&i| i != primary),
        }
    }

    /// True when channel 0 is not the MLII limb lead (e.g. swapped channels).
    pub fn lead_layout_flagged(&self) -> bool {
        self.leads.first().is_some_and(|l| l.name != "MLII")
    }

    pub fn lead(&self, role: LeadRole) -> Option<&Lead> {
        self.lead_index(role).map(|i| &self.leads[i])
    }

    pub fn summary(&self) -> RecordSummary {
        RecordSummary::from_annotations(&self.record_id, &self.annotations)
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Reads a WFDB record (format 212 signals) and its `.atr` annotations.
///
/// A missing annotation file yields a record with no annotations.
pub fn read_record(header_path: &Path) -> Result<EcgRecord> {
    read_record_with_annotator(header_path, Some("atr"))
}

pub fn read_record_with_annotator(header_path: &Path, annotator: Option<&str>) -> Result<EcgRecord> {
    let text = fs::read_to_string(header_path).map_err(|e| Error::io(header_path, e))?;
    let header = header::parse_header(header_path, &text)?;
    let dir = header_path.parent().unwrap_or_else(|| Path::new("."));
    let leads = read_signals(header_path, dir, &header)?;
    let n = leads.first().map_or(0, |l| l.samples.len());

    let mut annotations = Vec::new();
    if let Some(ext) = annotator {
        let ann_path = dir.join(format!("{}.{ext}", header.record.name));
        if ann_path.exists() {
            annotations = annotation::parse_annotations(&ann_path, &read_file(&ann_path)?)?;
            if let Some(a) = annotations.iter().find(|a| a.sample_index >= n) {
                return Err(Error::AnnotationOutOfRange {
                    path: ann_path,
                    index: a.sample_index,
                    len: n,
                });
            }
        } else {
            log::warn!("{}: no annotation file {}", header.record.name, ann_path.display());
        }
    }
    EcgRecord::new(header.record.name.clone(), header.record.fs, leads, annotations)
}

fn read_signals(header_path: &Path, dir: &Path, header: &Header) -> Result<Vec<Lead>> {
    // Signals sharing a file are frame-interleaved in header order.
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, sig) in header.signals.iter().enumerate() {
        if sig.format != 212 {
            return Err(Error::UnsupportedFormat {
                path: header_path.to_path_buf(),
                format: sig.format.to_string(),
            });
        }
        groups.entry(sig.file_name.as_str()).or_default().push(i);
    }

    let mut raw: Vec<Vec<i16>> = vec![Vec::new(); header.signals.len()];
    for (file, members) in &groups {
        let path = dir.join(file);
        let bytes = read_file(&path)?;
        let offset = header.signals[members[0]].byte_offset;
        let payload = bytes.get(offset..).unwrap_or(&[]);
        let width = members.len();
        let frames = match header.record.n_samples {
            Some(n) => n,
            None => format212::samples_in(payload.len()) / width,
        };
        let count = frames * width;
        let expected = format212::encoded_len(count).max(1) + offset;
        let samples = match format212::decode(payload, count) {
            Some(s) if !bytes.is_empty() && count > 0 => s,
            _ => {
                return Err(Error::TruncatedSignal {
                    path,
                    expected,
                    found: bytes.len(),
                })
            }
        };
        for (k, &sig) in members.iter().enumerate() {
            raw[sig] = samples.iter().skip(k).step_by(width).copied().collect();
        }
    }

    Ok(header
        .signals
        .iter()
        .zip(raw)
        .map(|(spec, adc)| {
            if let Some(expected) = spec.checksum {
                let sum = adc.iter().fold(0i16, |acc, &v| acc.wrapping_add(v));
                if sum != expected as i16 {
                    log::warn!(
                        "{}: checksum mismatch for {} ({sum} != {expected})",
                        header.record.name,
                        spec.description
                    );
                }
            }
            Lead {
                name: spec.description.clone(),
                samples: adc
                    .iter()
                    .map(|&v| (v as i32 - spec.baseline) as f64 / spec.gain)
                    .collect(),
            }
        })
        .collect())
}

/// Reads only the annotations of a record, without touching the signal file.
pub fn read_annotations(dir: &Path, record_id: &str, annotator: &str) -> Result<Vec<Annotation>> {
    let path = dir.join(format!("{record_id}.{annotator}"));
    annotation::parse_annotations(&path, &read_file(&path)?)
}

/// Writes a record as `<id>.hea`, `<id>.dat` (format 212, frame-interleaved)
/// and, when annotations are present, `<id>.atr`. Samples are quantized with
/// `gain` ADC units per physical unit and zero baseline.
pub fn write_record(dir: &Path, record: &EcgRecord, gain: f64) -> Result<PathBuf> {
    let id = &record.record_id;
    let n = record.len();
    let width = record.leads.len();
    let mut interleaved = Vec::with_capacity(n * width);
    for t in 0..n {
        for lead in &record.leads {
            let v = (lead.samples[t] * gain).round().clamp(-2048.0, 2047.0);
            interleaved.push(v as i16);
        }
    }
    let signals = record
        .leads
        .iter()
        .enumerate()
        .map(|(k, lead)| {
            let own: Vec<i16> = interleaved.iter().skip(k).step_by(width).copied().collect();
            SignalSpec {
                file_name: format!("{id}.dat"),
                format: 212,
                byte_offset: 0,
                gain,
                baseline: 0,
                units: "mV".into(),
                adc_resolution: Some(12),
                adc_zero: 0,
                initial_value: own.first().map(|&v| v as i32),
                checksum: Some(own.iter().fold(0i16, |a, &v| a.wrapping_add(v)) as i32),
                description: lead.name.clone(),
            }
        })
        .collect();
    let header = Header {
        record: header::RecordLine {
            name: id.clone(),
            n_signals: width,
            fs: record.fs,
            n_samples: Some(n),
        },
        signals,
        comments: Vec::new(),
    };
    let hea = dir.join(format!("{id}.hea"));
    fs::write(&hea, header.to_text()).map_err(|e| Error::io(&hea, e))?;
    let dat = dir.join(format!("{id}.dat"));
    fs::write(&dat, format212::encode(&interleaved)).map_err(|e| Error::io(&dat, e))?;
    if !record.annotations.is_empty() {
        let atr = dir.join(format!("{id}.atr"));
        fs::write(&atr, annotation::encode_annotations(&record.annotations))
            .map_err(|e| Error::io(&atr, e))?;
    }
    Ok(hea)
}

/// All `.hea` files in a directory, sorted by record name.
pub fn list_records(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "hea"))
        .collect();
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_lead_record() -> EcgRecord {
        let a: Vec<f64> = (0..1001).map(|i| ((i as f64) * 0.01).sin()).collect();
        let b: Vec<f64> = a.iter().map(|v| -0.5 * v).collect();
        EcgRecord::new(
            "900",
            360.0,
            vec![
                Lead { name: "MLII".into(), samples: a },
                Lead { name: "V1".into(), samples: b },
            ],
            vec![Annotation::new(100, 'N'), Annotation::new(460, 'V'), Annotation::new(700, '+')],
        )
        .unwrap()
    }

    #[test]
    fn write_then_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let rec = two_lead_record();
        let hea = write_record(dir.path(), &rec, 200.0).unwrap();
        let back = read_record(&hea).unwrap();
        assert_eq!(back.record_id, "900");
        assert_eq!(back.fs, 360.0);
        assert_eq!(back.len(), 1001);
        for (x, y) in rec.leads[1].samples.iter().zip(&back.leads[1].samples) {
            assert!((x - y).abs() <= 0.5 / 200.0 + 1e-12);
        }
        assert_eq!(back.beat_indices(), vec![100, 460]);
        assert_eq!(back.annotations.len(), 3);
        assert_eq!(back.lead_index(LeadRole::Secondary), Some(1));
    }

    #[test]
    fn empty_signal_file_is_truncated() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("e.hea"), "e 1 360\ne.dat 212 200 12 0 0 0 0 MLII\n").unwrap();
        fs::write(dir.path().join("e.dat"), []).unwrap();
        let err = read_record(&dir.path().join("e.hea")).unwrap_err();
        assert!(matches!(err, Error::TruncatedSignal { .. }), "{err}");
    }

    #[test]
    fn short_signal_file_is_truncated() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("s.hea"), "s 2 360 100\ns.dat 212 200 12 0 0 0 0 MLII\ns.dat 212 200 12 0 0 0 0 V5\n").unwrap();
        fs::write(dir.path().join("s.dat"), vec![0u8; 30]).unwrap();
        assert!(matches!(
            read_record(&dir.path().join("s.hea")).unwrap_err(),
            Error::TruncatedSignal { .. }
        ));
    }

    #[test]
    fn unsupported_format_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("u.hea"), "u 1 360 4\nu.dat 16 200 12 0 0 0 0 MLII\n").unwrap();
        fs::write(dir.path().join("u.dat"), vec![0u8; 8]).unwrap();
        assert!(matches!(
            read_record(&dir.path().join("u.hea")).unwrap_err(),
            Error::UnsupportedFormat { .. }
        ));
    }

    #[test]
    fn annotation_past_end_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let rec = two_lead_record();
        let hea = write_record(dir.path(), &rec, 200.0).unwrap();
        let anns = vec![Annotation::new(10, 'N'), Annotation::new(5000, 'N')];
        fs::write(dir.path().join("900.atr"), annotation::encode_annotations(&anns)).unwrap();
        assert!(matches!(
            read_record(&hea).unwrap_err(),
            Error::AnnotationOutOfRange { index: 5000, .. }
        ));
    }

    #[test]
    fn unequal_leads_rejected() {
        let err = EcgRecord::new(
            "x",
            360.0,
            vec![
                Lead { name: "a".into(), samples: vec![0.0; 3] },
                Lead { name: "b".into(), samples: vec![0.0; 4] },
            ],
            vec![],
        );
        assert!(err.is_err());
    }

    #[test]
    fn swapped_channels_are_flagged() {
        let mut rec = two_lead_record();
        rec.leads.swap(0, 1);
        assert!(rec.lead_layout_flagged());
        assert_eq!(rec.lead_index(LeadRole::Primary), Some(1));
        assert_eq!(rec.lead_index(LeadRole::Secondary), Some(0));
    }
}
