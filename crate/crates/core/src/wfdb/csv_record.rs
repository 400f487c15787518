//! CSV fallback reader: a header row, a `time` column in seconds, then one
//! column per lead. Annotations come from an optional `sample_index,symbol` file.

use std::path::Path;

use super::{Annotation, EcgRecord, Lead};
use crate::{Error, Result};

pub fn read_csv_record(path: &Path, annotations: Option<&Path>) -> Result<EcgRecord> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    if headers.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "{}: need a time column and at least one lead",
            path.display()
        )));
    }
    let mut time = Vec::new();
    let mut leads: Vec<Vec<f64>> = vec![Vec::new(); headers.len() - 1];
    for row in rdr.records() {
        let row = row?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("{}: bad number '{s}'", path.display())))
        };
        time.push(parse(&row[0])?);
        for (k, lead) in leads.iter_mut().enumerate() {
            lead.push(parse(&row[k + 1])?);
        }
    }
    if time.len() < 2 {
        return Err(Error::InvalidInput(format!("{}: too few rows", path.display())));
    }
    let mut dts: Vec<f64> = time.windows(2).map(|w| w[1] - w[0]).collect();
    dts.sort_by(f64::total_cmp);
    let dt = dts[dts.len() / 2];
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!(
            "{}: time column is not increasing",
            path.display()
        )));
    }

    let annotations = match annotations {
        Some(p) => {
            let mut out = Vec::new();
            let mut r = csv::Reader::from_path(p)?;
            for row in r.records() {
                let row = row?;
                let idx: usize = row[0].trim().parse().map_err(|_| {
                    Error::InvalidInput(format!("{}: bad sample index '{}'", p.display(), &row[0]))
                })?;
                let sym = row[1].trim().chars().next().unwrap_or(' ');
                out.push(Annotation::new(idx, sym));
            }
            out
        }
        None => Vec::new(),
    };
    let id = path
        .file_stem()
        .map_or_else(|| "csv".to_string(), |s| s.to_string_lossy().into_owned());
    EcgRecord::new(
        id,
        1.0 / dt,
        headers
            .iter()
            .skip(1)
            .zip(leads)
            .map(|(name, samples)| Lead {
                name: name.to_string(),
                samples,
            })
            .collect(),
        annotations,
    )
}
