//! CSV ingestion and export for scalar and vector series.
//!
//! Files use a header row; lines starting with `#` are comments. Ingestion is
//! strict: missing columns, unparsable cells, and non-finite values are
//! reported with their data row number rather than silently dropped.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::TimeSeries;
use crate::error::{Error, Result};

/// Which column of the file to read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelector {
    Name(String),
    Index(usize),
}

impl ColumnSelector {
    pub fn name(s: impl Into<String>) -> Self {
        ColumnSelector::Name(s.into())
    }
}

fn ingest_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Ingestion {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

/// Loads one column of a headered CSV file as a scalar series sampled at
/// `dt`. Data rows are numbered from 1 in error messages.
pub fn load_csv(path: impl AsRef<Path>, column: &ColumnSelector, dt: f64) -> Result<TimeSeries> {
    let path = path.as_ref();
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid("dt", dt, "must be finite and positive"));
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| ingest_err(path, e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| ingest_err(path, e.to_string()))?
        .clone();
    let col_idx = match column {
        ColumnSelector::Name(name) => headers.iter().position(|h| h == name).ok_or_else(|| {
            ingest_err(
                path,
                format!(
                    "column `{name}` not found; available: {}",
                    headers.iter().collect::<Vec<_>>().join(", ")
                ),
            )
        })?,
        ColumnSelector::Index(i) => {
            if *i >= headers.len() {
                return Err(ingest_err(
                    path,
                    format!("column index {i} out of range; file has {}", headers.len()),
                ));
            }
            *i
        }
    };
    let mut values = Vec::new();
    for (row_0, record) in reader.records().enumerate() {
        let row = row_0 + 1;
        let record = record.map_err(|e| ingest_err(path, format!("row {row}: {e}")))?;
        let cell = record
            .get(col_idx)
            .ok_or_else(|| ingest_err(path, format!("row {row}: missing column {col_idx}")))?;
        let v: f64 = cell
            .parse()
            .map_err(|_| ingest_err(path, format!("row {row}: cannot parse `{cell}` as a number")))?;
        if !v.is_finite() {
            return Err(ingest_err(path, format!("row {row}: non-finite value `{cell}`")));
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(ingest_err(path, "no data rows"));
    }
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    let col_name = match column {
        ColumnSelector::Name(n) => n.clone(),
        ColumnSelector::Index(i) => headers.get(*i).unwrap_or_default().to_string(),
    };
    TimeSeries::scalar(values, dt, format!("{stem}:{col_name}"))
}

/// Writes a series as CSV with an index column. `comments` become `#` lines
/// above the header, one per entry.
pub fn write_series_csv(series: &TimeSeries, path: impl AsRef<Path>, comments: &[String]) -> Result<()> {
    let path = path.as_ref();
    series.validate()?;
    let file = File::create(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut w = BufWriter::new(file);
    let io_err = |e: std::io::Error| Error::Io {
        path: path.display().to_string(),
        source: e,
    };
    for c in comments {
        writeln!(w, "# {c}").map_err(io_err)?;
    }
    match series.dim {
        1 => writeln!(w, "index,value").map_err(io_err)?,
        3 => writeln!(w, "index,x,y,z").map_err(io_err)?,
        d => {
            let cols: Vec<String> = (0..d).map(|i| format!("c{i}")).collect();
            writeln!(w, "index,{}", cols.join(",")).map_err(io_err)?;
        }
    }
    for (i, row) in series.values.chunks_exact(series.dim).enumerate() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(w, "{i},{}", cells.join(",")).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
