use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlaneKind {
    Cwt,
    Squeezed,
}

/// Complex time-scale or time-frequency matrix, stored row-major with one row
/// per scale (CWT) or frequency bin (squeezed).
#[derive(Debug, Clone, PartialEq)]
pub struct TfPlane {
    pub kind: PlaneKind,
    pub values: Vec<Complex64>,
    pub n_rows: usize,
    pub n_cols: usize,
    /// Seconds.
    pub time_axis: Vec<f64>,
    /// Scales for a CWT plane, Hz for a squeezed one.
    pub row_axis: Vec<f64>,
    /// Hz for both kinds (peak frequency of each scale for a CWT plane).
    pub row_freq: Vec<f64>,
}

impl TfPlane {
    pub fn zeros(kind: PlaneKind, time_axis: Vec<f64>, row_axis: Vec<f64>, row_freq: Vec<f64>) -> Self {
        let (n_rows, n_cols) = (row_axis.len(), time_axis.len());
        TfPlane {
            kind,
            values: vec![Complex64::new(0.0, 0.0); n_rows * n_cols],
            n_rows,
            n_cols,
            time_axis,
            row_axis,
            row_freq,
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.values[row * self.n_cols + col]
    }

    #[inline]
    pub fn get_mut(&mut self, row: usize, col: usize) -> &mut Complex64 {
        &mut self.values[row * self.n_cols + col]
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.values[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn column_abs(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.get(r, col).norm()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    /// Writes the plane as a flat little-endian file: magic `TFPL`, u32
    /// version, u32 kind (0 cwt, 1 squeezed), u64 rows, u64 cols, `cols` f64
    /// times, `rows` f64 row-axis values, `rows` f64 row frequencies, then
    /// `rows * cols` (re, im) f64 pairs in row-major order.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(32 + 8 * (self.n_cols + 2 * self.n_rows) + 16 * self.values.len());
        buf.extend_from_slice(b"TFPL");
        buf.extend_from_slice(&DUMP_VERSION.to_le_bytes());
        let kind: u32 = match self.kind {
            PlaneKind::Cwt => 0,
            PlaneKind::Squeezed => 1,
        };
        buf.extend_from_slice(&kind.to_le_bytes());
        buf.extend_from_slice(&(self.n_rows as u64).to_le_bytes());
        buf.extend_from_slice(&(self.n_cols as u64).to_le_bytes());
        for v in self.time_axis.iter().chain(&self.row_axis).chain(&self.row_freq) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        for v in &self.values {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&buf).map_err(|e| Error::io(path, e))
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let bad = |reason: &str| Error::InvalidInput(format!("{}: {reason}", path.display()));
        if bytes.len() < 28 || &bytes[..4] != b"TFPL" {
            return Err(bad("not a plane dump"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        if u32_at(4) != DUMP_VERSION {
            return Err(bad("unsupported dump version"));
        }
        let kind = match u32_at(8) {
            0 => PlaneKind::Cwt,
            1 => PlaneKind::Squeezed,
            _ => return Err(bad("unknown plane kind")),
        };
        let n_rows = u64_at(12) as usize;
        let n_cols = u64_at(20) as usize;
        let expected = 28 + 8 * (n_cols + 2 * n_rows) + 16 * n_rows * n_cols;
        if bytes.len() != expected {
            return Err(bad("size does not match header"));
        }
        let mut floats = bytes[28..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let time_axis: Vec<f64> = floats.by_ref().take(n_cols).collect();
        let row_axis: Vec<f64> = floats.by_ref().take(n_rows).collect();
        let row_freq: Vec<f64> = floats.by_ref().take(n_rows).collect();
        let rest: Vec<f64> = floats.collect();
        let values = rest.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        Ok(TfPlane {
            kind,
            values,
            n_rows,
            n_cols,
            time_axis,
            row_axis,
            row_freq,
        })
    }
}

pub const DUMP_VERSION: u32 = 1;
