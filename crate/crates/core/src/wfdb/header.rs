//! WFDB header (`.hea`) parsing and writing.

use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RecordLine {
    pub name: String,
    pub n_signals: usize,
    pub fs: f64,
    pub n_samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub file_name: String,
    pub format: u16,
    pub byte_offset: usize,
    /// ADC units per physical unit.
    pub gain: f64,
    pub baseline: i32,
    pub units: String,
    pub adc_resolution: Option<u32>,
    pub adc_zero: i32,
    pub initial_value: Option<i32>,
    pub checksum: Option<i32>,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Header {
    pub record: RecordLine,
    pub signals: Vec<SignalSpec>,
    pub comments: Vec<String>,
}

const DEFAULT_GAIN: f64 = 200.0;

fn malformed(path: &Path, reason: impl Into<String>) -> Error {
    Error::MalformedHeader {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Leading decimal number of a field such as `360/1(0)` or `200(1024)/mV`.
fn leading_number(field: &str) -> &str {
    let end = field
        .char_indices()
        .find(|&(i, c)| !(c.is_ascii_digit() || c == '.' || ((c == '-' || c == '+') && i == 0) || c == 'e'))
        .map_or(field.len(), |(i, _)| i);
    &field[..end]
}

fn parse_record_line(path: &Path, line: &str) -> Result<RecordLine> {
    let mut fields = line.split_whitespace();
    let name = fields
        .next()
        .ok_or_else(|| malformed(path, "empty record line"))?;
    if name.contains('/') {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            format: format!("multi-segment record {name}"),
        });
    }
    let n_signals: usize = fields
        .next()
        .ok_or_else(|| malformed(path, "missing signal count"))?
        .parse()
        .map_err(|_| malformed(path, "bad signal count"))?;
    let fs = match fields.next() {
        Some(f) => leading_number(f)
            .parse::<f64>()
            .map_err(|_| malformed(path, format!("bad sampling frequency '{f}'")))?,
        None => 250.0,
    };
    if !(fs > 0.0) {
        return Err(malformed(path, "sampling frequency must be positive"));
    }
    let n_samples = match fields.next() {
        Some(f) => Some(
            f.parse::<usize>()
                .map_err(|_| malformed(path, format!("bad sample count '{f}'")))?,
        ),
        None => None,
    };
    Ok(RecordLine {
        name: name.to_string(),
        n_signals,
        fs,
        n_samples,
    })
}

fn parse_signal_line(path: &Path, line: &str) -> Result<SignalSpec> {
    let mut fields = line.split_whitespace();
    let file_name = fields
        .next()
        .ok_or_else(|| malformed(path, "empty signal line"))?
        .to_string();
    let fmt_field = fields
        .next()
        .ok_or_else(|| malformed(path, format!("missing format for {file_name}")))?;
    if fmt_field.contains('x') {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            format: format!("{fmt_field} (multiple samples per frame)"),
        });
    }
    let format: u16 = leading_number(fmt_field)
        .parse()
        .map_err(|_| malformed(path, format!("bad format '{fmt_field}'")))?;
    let byte_offset = match fmt_field.split_once('+') {
        Some((_, off)) => off
            .parse()
            .map_err(|_| malformed(path, format!("bad byte offset in '{fmt_field}'")))?,
        None => 0,
    };

    let mut gain = DEFAULT_GAIN;
    let mut explicit_baseline = None;
    let mut units = "mV".to_string();
    if let Some(g) = fields.next() {
        let num = leading_number(g);
        let value: f64 = num
            .parse()
            .map_err(|_| malformed(path, format!("bad gain '{g}'")))?;
        if value != 0.0 {
            gain = value;
        }
        let rest = &g[num.len()..];
        if let Some(inner) = rest.strip_prefix('(') {
            let close = inner
                .find(')')
                .ok_or_else(|| malformed(path, format!("unclosed baseline in '{g}'")))?;
            explicit_baseline = Some(
                inner[..close]
                    .parse::<i32>()
                    .map_err(|_| malformed(path, format!("bad baseline in '{g}'")))?,
            );
        }
        if let Some((_, u)) = rest.split_once('/') {
            units = u.to_string();
        }
    }
    let mut next_int = |what: &str| -> Result<Option<i32>> {
        match fields.next() {
            Some(f) => f
                .parse::<i32>()
                .map(Some)
                .map_err(|_| malformed(path, format!("bad {what} '{f}'"))),
            None => Ok(None),
        }
    };
    let adc_resolution = next_int("ADC resolution")?.map(|v| v as u32);
    let adc_zero = next_int("ADC zero")?.unwrap_or(0);
    let initial_value = next_int("initial value")?;
    let checksum = next_int("checksum")?;
    let _block_size = next_int("block size")?;
    let description = fields.collect::<Vec<_>>().join(" ");

    Ok(SignalSpec {
        file_name,
        format,
        byte_offset,
        gain,
        baseline: explicit_baseline.unwrap_or(adc_zero),
        units,
        adc_resolution,
        adc_zero,
        initial_value,
        checksum,
        description,
    })
}

pub fn parse_header(path: &Path, text: &str) -> Result<Header> {
    let mut comments = Vec::new();
    let mut lines = Vec::new();
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            comments.push(c.trim().to_string());
        } else {
            lines.push(line);
        }
    }
    let (first, rest) = lines
        .split_first()
        .ok_or_else(|| malformed(path, "no record line"))?;
    let record = parse_record_line(path, first)?;
    if rest.len() < record.n_signals {
        return Err(malformed(
            path,
            format!(
                "record declares {} signals but {} signal lines found",
                record.n_signals,
                rest.len()
            ),
        ));
    }
    let signals = rest[..record.n_signals]
        .iter()
        .map(|l| parse_signal_line(path, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(Header {
        record,
        signals,
        comments,
    })
}

impl Header {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let r = &self.record;
        let _ = write!(s, "{} {} {}", r.name, r.n_signals, r.fs);
        if let Some(n) = r.n_samples {
            let _ = write!(s, " {n}");
        }
        s.push('\n');
        for sig in &self.signals {
            let _ = write!(s, "{} {}", sig.file_name, sig.format);
            if sig.byte_offset > 0 {
                let _ = write!(s, "+{}", sig.byte_offset);
            }
            let _ = write!(s, " {}({})/{}", sig.gain, sig.baseline, sig.units);
            let _ = write!(
                s,
                " {} {} {} {} 0",
                sig.adc_resolution.unwrap_or(12),
                sig.adc_zero,
                sig.initial_value.unwrap_or(0),
                sig.checksum.unwrap_or(0)
            );
            if !sig.description.is_empty() {
                let _ = write!(s, " {}", sig.description);
            }
            s.push('\n');
        }
        for c in &self.comments {
            let _ = writeln!(s, "# {c}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MITDB_100: &str = "100 2 360 650000 0:0:0 0/0/0\n\
        100.dat 212 200 11 1024 995 -22131 0 MLII\n\
        100.dat 212 200 11 1024 1011 20052 0 V5\n\
        # 69 M 1085 1629 x1\n\
        # Aldomet, Inderal\n";

    #[test]
    fn parses_mitdb_style_header() {
        let h = parse_header(Path::new("100.hea"), MITDB_100).unwrap();
        assert_eq!(h.record.name, "100");
        assert_eq!(h.record.n_signals, 2);
        assert_eq!(h.record.fs, 360.0);
        assert_eq!(h.record.n_samples, Some(650000));
        assert_eq!(h.signals[0].format, 212);
        assert_eq!(h.signals[0].gain, 200.0);
        assert_eq!(h.signals[0].baseline, 1024);
        assert_eq!(h.signals[0].initial_value, Some(995));
        assert_eq!(h.signals[0].checksum, Some(-22131));
        assert_eq!(h.signals[0].description, "MLII");
        assert_eq!(h.signals[1].description, "V5");
        assert_eq!(h.comments.len(), 2);
    }

    #[test]
    fn explicit_baseline_and_units() {
        let text = "r1 1 500\nr1.dat 212 100(-12)/uV 12 0 0 0 0 lead I\n";
        let h = parse_header(Path::new("r1.hea"), text).unwrap();
        assert_eq!(h.signals[0].gain, 100.0);
        assert_eq!(h.signals[0].baseline, -12);
        assert_eq!(h.signals[0].units, "uV");
        assert_eq!(h.signals[0].description, "lead I");
        assert_eq!(h.record.n_samples, None);
    }

    #[test]
    fn missing_signal_lines_is_malformed() {
        let err = parse_header(Path::new("x.hea"), "x 2 360 10\nx.dat 212 200\n").unwrap_err();
        assert!(matches!(err, Error::MalformedHeader { .. }));
    }

    #[test]
    fn garbage_is_malformed() {
        assert!(parse_header(Path::new("x.hea"), "").is_err());
        assert!(parse_header(Path::new("x.hea"), "x two 360\n").is_err());
        assert!(parse_header(Path::new("x.hea"), "x 1 -5\nx.dat 212\n").is_err());
    }

    #[test]
    fn text_round_trip() {
        let h = parse_header(Path::new("100.hea"), MITDB_100).unwrap();
        let again = parse_header(Path::new("100.hea"), &h.to_text()).unwrap();
        assert_eq!(h.record, again.record);
        assert_eq!(h.signals, again.signals);
    }
}
