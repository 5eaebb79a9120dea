//! CSV ingestion and emission. Rows are sensors, columns are time points.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::error::{LatcError, Result};
use crate::series::TimeSeriesMatrix;

/// Where and how to read a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetDescriptor {
    pub path: PathBuf,
    pub season_len: usize,
    pub delimiter: u8,
    /// Extra token marking a missing cell. Empty cells and `nan` (any case)
    /// are always missing.
    pub missing_token: Option<String>,
}

impl DatasetDescriptor {
    pub fn new(path: impl Into<PathBuf>, season_len: usize) -> Self {
        DatasetDescriptor {
            path: path.into(),
            season_len,
            delimiter: b',',
            missing_token: None,
        }
    }
}

fn is_missing(cell: &str, token: Option<&str>) -> bool {
    cell.is_empty() || cell.eq_ignore_ascii_case("nan") || token.is_some_and(|t| cell == t)
}

/// Attaches the file name to I/O failures.
fn with_path(err: LatcError, path: &Path) -> LatcError {
    match err {
        LatcError::Io(e) => LatcError::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {}", path.display(), e),
        )),
        other => other,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| with_path(e.into(), path))
}

fn read_grid<T, F>(path: &Path, delimiter: u8, mut parse: F) -> Result<Array2<T>>
where
    F: FnMut(&str, usize, usize) -> Result<T>,
{
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| with_path(e.into(), path))?;
    let mut cells = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record?;
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(LatcError::Parse(format!(
                    "{}: row {} has {} cells, expected {}",
                    path.display(),
                    rows + 1,
                    record.len(),
                    c
                )))
            }
            _ => {}
        }
        for (c, cell) in record.iter().enumerate() {
            cells.push(parse(cell, rows, c)?);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| LatcError::Parse(format!("{}: empty file", path.display())))?;
    Ok(Array2::from_shape_vec((rows, cols), cells).expect("rows checked"))
}

/// Reads a sensor-by-time CSV; missing cells become unobserved.
pub fn load_csv(desc: &DatasetDescriptor) -> Result<TimeSeriesMatrix> {
    let token = desc.missing_token.as_deref();
    let mut observed = Vec::new();
    let values = read_grid(&desc.path, desc.delimiter, |cell, r, c| {
        if is_missing(cell, token) {
            observed.push(false);
            Ok(0.0)
        } else {
            observed.push(true);
            cell.parse::<f64>().map_err(|_| {
                LatcError::Parse(format!(
                    "{}: cell ({}, {}) = {:?} is not a number",
                    desc.path.display(),
                    r + 1,
                    c + 1,
                    cell
                ))
            })
        }
    })?;
    let mask = Array2::from_shape_vec(values.dim(), observed).expect("one flag per cell");
    TimeSeriesMatrix::new(values, mask)
}

/// Reads a 0/1 mask file (`1` = selected).
pub fn load_mask_csv(path: &Path) -> Result<Array2<bool>> {
    read_grid(path, b',', |cell, r, c| match cell {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        _ => Err(LatcError::Parse(format!(
            "{}: mask cell ({}, {}) = {:?} is not 0 or 1",
            path.display(),
            r + 1,
            c + 1,
            cell
        ))),
    })
}

fn write_rows<F>(path: &Path, rows: usize, cols: usize, mut cell: F) -> Result<()>
where
    F: FnMut(usize, usize) -> Option<String>,
{
    let mut out = create(path)?;
    for r in 0..rows {
        for c in 0..cols {
            if c > 0 {
                out.write_all(b",")?;
            }
            if let Some(s) = cell(r, c) {
                out.write_all(s.as_bytes())?;
            }
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// `f64`'s `Display` is the shortest representation that parses back to the
/// same bits, so written values round-trip exactly.
fn fmt_value(v: f64) -> String {
    format!("{}", v)
}

/// Writes a masked series; unobserved cells are left empty.
pub fn write_series_csv(y: &TimeSeriesMatrix, path: &Path) -> Result<()> {
    let (rows, cols) = y.values().dim();
    write_rows(path, rows, cols, |r, c| {
        y.mask()[[r, c]].then(|| fmt_value(y.values()[[r, c]]))
    })
}

pub fn write_matrix_csv(m: &Array2<f64>, path: &Path) -> Result<()> {
    let (rows, cols) = m.dim();
    write_rows(path, rows, cols, |r, c| Some(fmt_value(m[[r, c]])))
}

pub fn write_mask_csv(mask: &Array2<bool>, path: &Path) -> Result<()> {
    let (rows, cols) = mask.dim();
    write_rows(path, rows, cols, |r, c| {
        Some(if mask[[r, c]] { "1" } else { "0" }.to_string())
    })
}

/// Plot-ready long format: `sensor,time,truth,estimate`. Time indices are
/// zero-based columns of the source series; missing truth is left empty.
pub fn write_long_csv(
    truth: &TimeSeriesMatrix,
    est: &Array2<f64>,
    first_time: usize,
    path: &Path,
) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "sensor,time,truth,estimate")?;
    for m in 0..est.nrows() {
        for c in 0..est.ncols() {
            let t = first_time + c;
            let truth_cell = if truth.mask()[[m, t]] {
                fmt_value(truth.values()[[m, t]])
            } else {
                String::new()
            };
            writeln!(out, "{},{},{},{}", m, t, truth_cell, fmt_value(est[[m, c]]))?;
        }
    }
    out.flush()?;
    Ok(())
}
