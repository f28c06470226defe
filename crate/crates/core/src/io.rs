//! Matrix and label file formats.
//!
//! Binary matrices: the ASCII magic `DLRM`, rows and cols as little-endian
//! `u32`, then `rows * cols` little-endian `f64` values in row-major order.
//! CSV matrices: one row per line, `,` separated, `.` decimal point, no header.
//! Label files: one base-10 integer per line.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::labels::LabelVector;
use crate::matrix::DataMatrix;

pub const MAGIC: &[u8; 4] = b"DLRM";
const HEADER_LEN: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Binary,
}

impl MatrixFormat {
    /// `.csv` files are CSV, everything else binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => MatrixFormat::Csv,
            _ => MatrixFormat::Binary,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            MatrixFormat::Csv => "csv",
            MatrixFormat::Binary => "dlrm",
        }
    }
}

impl FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(MatrixFormat::Csv),
            "binary" | "bin" | "dlrm" => Ok(MatrixFormat::Binary),
            other => Err(Error::InvalidArgument(format!("unknown matrix format {other:?}"))),
        }
    }
}

/// Shortest decimal string that parses back to the same `f64`.
pub fn format_real(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn encode_binary(m: &DataMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * m.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(m.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u32).to_le_bytes());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
    out
}

pub fn decode_binary(bytes: &[u8]) -> Result<DataMatrix> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::MalformedHeader(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::MalformedHeader("missing DLRM magic".into()));
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyDimension);
    }
    let payload = &bytes[HEADER_LEN..];
    let expected = rows.checked_mul(cols).and_then(|c| c.checked_mul(8));
    if expected != Some(payload.len()) {
        return Err(Error::DimensionMismatch(format!(
            "header declares {rows}x{cols} but payload has {} bytes",
            payload.len()
        )));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            row: idx / cols,
            col: idx % cols,
        });
    }
    DataMatrix::from_row_major(rows, cols, &values)
}

pub fn encode_csv(m: &DataMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| format_real(m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn decode_csv(text: &str) -> Result<DataMatrix> {
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut count = 0;
        for (field, token) in line.split(',').enumerate() {
            let token = token.trim();
            let v: f64 = token.parse().map_err(|_| Error::NonNumeric {
                line: line_no + 1,
                field: field + 1,
                token: token.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite { row: rows, col: field });
            }
            values.push(v);
            count += 1;
        }
        match cols {
            None => cols = Some(count),
            Some(c) if c != count => {
                return Err(Error::DimensionMismatch(format!(
                    "line {} has {count} fields, expected {c}",
                    line_no + 1
                )))
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or(Error::EmptyDimension)?;
    DataMatrix::from_row_major(rows, cols, &values)
}

pub fn read_matrix(path: impl AsRef<Path>, format: MatrixFormat) -> Result<DataMatrix> {
    let path = path.as_ref();
    match format {
        MatrixFormat::Binary => decode_binary(&fs::read(path).map_err(|e| Error::io(path, e))?),
        MatrixFormat::Csv => decode_csv(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?),
    }
}

pub fn write_matrix(m: &DataMatrix, path: impl AsRef<Path>, format: MatrixFormat) -> Result<()> {
    let path = path.as_ref();
    let result = match format {
        MatrixFormat::Binary => fs::write(path, encode_binary(m)),
        MatrixFormat::Csv => fs::write(path, encode_csv(m)),
    };
    result.map_err(|e| Error::io(path, e))
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<LabelVector> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let l = line
            .parse::<usize>()
            .map_err(|_| Error::InvalidLabels(format!("line {}: {line:?} is not a label", no + 1)))?;
        labels.push(l);
    }
    LabelVector::from_truth(labels)
}

pub fn write_labels(labels: &LabelVector, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::with_capacity(labels.len() * 3);
    for l in labels.as_slice() {
        text.push_str(&l.to_string());
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
