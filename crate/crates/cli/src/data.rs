//! Matrix CSV input: a header row, then one row per variable. A leading
//! non-numeric field on a row is taken as that variable's label.

use std::path::Path;

use faer::Mat;
use spiked_core::{Error, Result};

pub fn read_matrix(path: &Path) -> Result<Mat<f64>> {
    let file = std::fs::File::open(path)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Config(format!("{}: line {line}: {e}", path.display())))?;
        let mut fields = record.iter().peekable();
        if let Some(first) = fields.peek() {
            if first.parse::<f64>().is_err() {
                fields.next();
            }
        }
        let row = fields
            .enumerate()
            .map(|(j, f)| {
                f.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    Error::Config(format!(
                        "{}: line {line}, value {}: `{f}` is not a finite number",
                        path.display(),
                        j + 1
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let p = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    if p == 0 || n == 0 {
        return Err(Error::DimensionError(format!("{}: no data rows", path.display())));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::DimensionError(format!(
            "{}: row {} has {} values, expected {n}",
            path.display(),
            i + 1,
            r.len()
        )));
    }
    Ok(Mat::from_fn(p, n, |i, j| rows[i][j]))
}
