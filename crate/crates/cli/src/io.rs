//! File formats: the FDPM binary matrix, CSV matrices, and label files.
//!
//! FDPM layout: magic bytes `FDPM`, version u16, then u64 n, u64 d, then
//! n*d IEEE-754 f64 values, row-major; all integers and floats little
//! endian. CSV matrices (comma-separated, optional header line) are
//! accepted for inputs up to [`CSV_VALUE_LIMIT`] values; larger data must
//! use FDPM.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use faithdp::DataMatrix;

use crate::CliError;

pub const FDPM_MAGIC: &[u8; 4] = b"FDPM";
pub const FDPM_VERSION: u16 = 1;
pub const CSV_VALUE_LIMIT: usize = 1_000_000;

fn io_err(path: &Path, err: std::io::Error) -> CliError {
    CliError::io(format!("{}: {err}", path.display()))
}

pub fn write_fdpm(path: &Path, data: &DataMatrix) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?);
    let mut emit = |bytes: &[u8]| w.write_all(bytes).map_err(|e| io_err(path, e));
    emit(FDPM_MAGIC)?;
    emit(&FDPM_VERSION.to_le_bytes())?;
    emit(&(data.n() as u64).to_le_bytes())?;
    emit(&(data.d() as u64).to_le_bytes())?;
    for v in data.values() {
        emit(&v.to_le_bytes())?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_fdpm(path: &Path) -> Result<DataMatrix, CliError> {
    let mut r = BufReader::new(File::open(path).map_err(|e| io_err(path, e))?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|e| io_err(path, e))?;
    if &magic != FDPM_MAGIC {
        return Err(CliError::data(format!(
            "{}: not an FDPM file (bad magic)",
            path.display()
        )));
    }
    let mut u16buf = [0u8; 2];
    r.read_exact(&mut u16buf).map_err(|e| io_err(path, e))?;
    let version = u16::from_le_bytes(u16buf);
    if version != FDPM_VERSION {
        return Err(CliError::data(format!(
            "{}: unsupported FDPM version {version}",
            path.display()
        )));
    }
    let mut u64buf = [0u8; 8];
    r.read_exact(&mut u64buf).map_err(|e| io_err(path, e))?;
    let n = u64::from_le_bytes(u64buf) as usize;
    r.read_exact(&mut u64buf).map_err(|e| io_err(path, e))?;
    let d = u64::from_le_bytes(u64buf) as usize;
    let count = n
        .checked_mul(d)
        .ok_or_else(|| CliError::data(format!("{}: matrix dimensions overflow", path.display())))?;
    let mut values = Vec::with_capacity(count);
    let mut chunk = [0u8; 8];
    for _ in 0..count {
        r.read_exact(&mut chunk).map_err(|e| io_err(path, e))?;
        values.push(f64::from_le_bytes(chunk));
    }
    DataMatrix::new(n, d, values).map_err(CliError::from)
}

fn read_csv_matrix(path: &Path) -> Result<DataMatrix, CliError> {
    let r = BufReader::new(File::open(path).map_err(|e| io_err(path, e))?);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut total = 0usize;
    for (lineno, line) in r.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = trimmed.split(',').map(|f| f.trim().parse()).collect();
        match parsed {
            Ok(row) => {
                total += row.len();
                if total > CSV_VALUE_LIMIT {
                    return Err(CliError::usage(format!(
                        "{}: more than {CSV_VALUE_LIMIT} values; convert to FDPM with `gen` \
                         or supply an .fdpm file",
                        path.display()
                    )));
                }
                rows.push(row);
            }
            Err(e) => {
                // A non-numeric first line is a header; anywhere else it is
                // an error.
                if lineno == 0 && rows.is_empty() {
                    continue;
                }
                return Err(CliError::data(format!(
                    "{}:{}: {e}",
                    path.display(),
                    lineno + 1
                )));
            }
        }
    }
    DataMatrix::from_rows(&rows).map_err(CliError::from)
}

/// Reads a data matrix, choosing the format from the file extension
/// (`.fdpm` binary, anything else CSV).
pub fn read_matrix(path: &Path) -> Result<DataMatrix, CliError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("fdpm") => read_fdpm(path),
        _ => read_csv_matrix(path),
    }
}

/// Writes labels as `index,label` lines sorted by index, no header.
pub fn write_labels(path: &Path, labels: &[u32]) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?);
    for (i, l) in labels.iter().enumerate() {
        writeln!(w, "{i},{l}").map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads an `index,label` file; indices must be 0..n in order.
pub fn read_labels(path: &Path) -> Result<Vec<u32>, CliError> {
    let r = BufReader::new(File::open(path).map_err(|e| io_err(path, e))?);
    let mut labels = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let bad = |msg: &str| CliError::data(format!("{}:{}: {msg}", path.display(), lineno + 1));
        let (idx, label) = trimmed
            .split_once(',')
            .ok_or_else(|| bad("expected `index,label`"))?;
        let idx: usize = idx.trim().parse().map_err(|_| bad("bad index"))?;
        if idx != labels.len() {
            return Err(bad(&format!("expected index {}, got {idx}", labels.len())));
        }
        let label: u32 = label.trim().parse().map_err(|_| bad("bad label"))?;
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(CliError::data(format!(
            "{}: no labels found",
            path.display()
        )));
    }
    Ok(labels)
}
