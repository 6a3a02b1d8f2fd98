//! Comma-separated datasets: one integer label column plus real-valued
//! feature columns. A header row is optional.

use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

use super::Dataset;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Header {
    /// Treat the first row as a header if its label field is not an integer.
    Auto,
    Present,
    Absent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CsvOptions {
    pub label_column: usize,
    pub header: Header,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            label_column: 0,
            header: Header::Auto,
        }
    }
}

fn format_err(line: u64, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("csv line {line}: {msg}"))
}

pub fn parse_csv<R: std::io::Read>(reader: R, opts: &CsvOptions) -> Result<Dataset> {
    let mut rdr = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(::csv::Trim::All)
        .from_reader(reader);

    let mut width = None;
    let mut labels = Vec::new();
    let mut data = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(format!("csv: {e}")))?;
        let line = rec.position().map_or(i as u64 + 1, |p| p.line());
        if rec.len() <= opts.label_column {
            return Err(format_err(
                line,
                format!("{} fields, no label column {}", rec.len(), opts.label_column),
            ));
        }
        let label_field = &rec[opts.label_column];
        let label = label_field.parse::<usize>();
        if i == 0 {
            let skip = match opts.header {
                Header::Present => true,
                Header::Absent => false,
                Header::Auto => label.is_err(),
            };
            if skip {
                continue;
            }
        }
        let label = label.map_err(|_| format_err(line, format!("bad label {label_field:?}")))?;
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(format_err(line, format!("{} fields, expected {w}", rec.len())));
        }
        for (j, field) in rec.iter().enumerate() {
            if j == opts.label_column {
                continue;
            }
            let v: f64 = field
                .parse()
                .map_err(|_| format_err(line, format!("bad value {field:?}")))?;
            if !v.is_finite() {
                return Err(format_err(line, format!("non-finite value {field:?}")));
            }
            data.push(v);
        }
        labels.push(label);
    }
    let cols = width.map_or(0, |w| w - 1);
    let features = Matrix::from_vec(labels.len(), cols, data)?;
    Dataset::new(features, labels)
}

pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv(std::io::BufReader::new(file), opts)
}

/// Writes `label,f0,f1,...` with a header row. Reals use the shortest
/// representation that round-trips.
pub fn write_csv<W: std::io::Write>(mut out: W, ds: &Dataset) -> std::io::Result<()> {
    let mut line = String::from("label");
    for j in 0..ds.dim() {
        line.push_str(&format!(",f{j}"));
    }
    line.push('\n');
    out.write_all(line.as_bytes())?;
    for (row, label) in ds.features.row_iter().zip(&ds.labels) {
        line.clear();
        line.push_str(&label.to_string());
        for v in row {
            line.push(',');
            line.push_str(&v.to_string());
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn save_csv(path: impl AsRef<Path>, ds: &Dataset) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_csv(&mut w, ds).map_err(|e| Error::io(path, e))?;
    std::io::Write::flush(&mut w).map_err(|e| Error::io(path, e))
}
