use std::path::Path;

use super::BeatFeatures;
use crate::wfdb::AamiClass;
use crate::{Error, Result};

/// Column order of [`BeatFeatures::vector`].
pub const FEATURE_NAMES: [&str; 6] = ["zeta", "r_amp", "rr_prev", "rr_next", "rr_mean10", "qrs_dur"];

const HEADER: [&str; 9] = [
    "record_id", "beat_index", "zeta", "r_amp", "rr_prev", "rr_next", "rr_mean10", "qrs_dur", "label",
];

pub fn write_features_csv(path: &Path, rows: &[BeatFeatures]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.record_id.clone(),
            r.beat_index.to_string(),
            r.zeta.to_string(),
            r.r_amp.to_string(),
            r.rr_prev.to_string(),
            r.rr_next.to_string(),
            r.rr_mean10.to_string(),
            r.qrs_dur.to_string(),
            r.label.map(|l| l.as_str().to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_features_csv(path: &Path) -> Result<Vec<BeatFeatures>> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(Error::InvalidInput(format!("{}: unexpected header {:?}", path.display(), header)));
    }
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |what: &str| Error::InvalidInput(format!("{} row {}: bad {what}", path.display(), line + 2));
        let num = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(HEADER[i]));
        let label = match &rec[8] {
            "" => None,
            s => Some(AamiClass::parse(s).ok_or_else(|| bad("label"))?),
        };
        out.push(BeatFeatures {
            record_id: rec[0].to_string(),
            beat_index: rec[1].parse().map_err(|_| bad("beat_index"))?,
            zeta: num(2)?,
            r_amp: num(3)?,
            rr_prev: num(4)?,
            rr_next: num(5)?,
            rr_mean10: num(6)?,
            qrs_dur: num(7)?,
            label,
        });
    }
    Ok(out)
}
