//! Plain-text CSV formats: numeric matrices (one row per instance), label
//! files (one identifier per line) and named rows (`id,v1,...,vm`, used for
//! prototypes and vocabularies).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

fn fmt_value(v: f64) -> String {
    // 17 significant digits round-trips every finite f64 exactly
    format!("{v:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file))
}

fn parse_f64(field: &str, path: &Path, row: usize) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| {
        Error::parse(
            path.display().to_string(),
            format!("row {row}: '{field}' is not a number"),
        )
    })?;
    if !v.is_finite() {
        return Err(Error::parse(
            path.display().to_string(),
            format!("row {row}: non-finite value '{field}'"),
        ));
    }
    Ok(v)
}

pub fn save_matrix(m: &DMatrix<f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    for r in 0..m.nrows() {
        let line: Vec<String> = m.row(r).iter().map(|&v| fmt_value(v)).collect();
        writeln!(w, "{}", line.join(",")).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, rec) in reader(path)?.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let row = rec
            .iter()
            .map(|f| parse_f64(f, path, k))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(
                    path.display().to_string(),
                    format!("row {k} has {} fields, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(path.display().to_string(), "no rows"));
    }
    let cols = rows[0].len();
    Ok(DMatrix::from_fn(rows.len(), cols, |r, c| rows[r][c]))
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let t = line.trim();
        if !t.is_empty() {
            out.push(t.to_string());
        }
    }
    if out.is_empty() {
        return Err(Error::parse(path.display().to_string(), "no labels"));
    }
    Ok(out)
}

pub fn save_labels(labels: &[String], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    for l in labels {
        writeln!(w, "{l}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads `id,v1,...,vm` rows.
pub fn load_named_rows(path: impl AsRef<Path>) -> Result<(Vec<String>, DMatrix<f64>)> {
    let path = path.as_ref();
    let mut ids = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, rec) in reader(path)?.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let mut fields = rec.iter();
        let id = fields.next().unwrap_or_default().to_string();
        let row = fields.map(|f| parse_f64(f, path, k)).collect::<Result<Vec<_>>>()?;
        if row.is_empty() || rows.first().is_some_and(|f| f.len() != row.len()) {
            return Err(Error::parse(
                path.display().to_string(),
                format!("row {k} has an inconsistent number of values"),
            ));
        }
        ids.push(id);
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(path.display().to_string(), "no rows"));
    }
    let cols = rows[0].len();
    Ok((ids, DMatrix::from_fn(rows.len(), cols, |r, c| rows[r][c])))
}

pub fn save_named_rows(ids: &[String], m: &DMatrix<f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if ids.len() != m.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} ids for {} rows",
            ids.len(),
            m.nrows()
        )));
    }
    let mut w = create(path)?;
    for (r, id) in ids.iter().enumerate() {
        let vals: Vec<String> = m.row(r).iter().map(|&v| fmt_value(v)).collect();
        writeln!(w, "{id},{}", vals.join(",")).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("i.csv");
        let m = DMatrix::<f64>::identity(2, 2);
        save_matrix(&m, &p).unwrap();
        assert_eq!(load_matrix(&p).unwrap(), m);
    }

    #[test]
    fn pi_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pi.csv");
        let m = DMatrix::from_element(1, 1, std::f64::consts::PI);
        save_matrix(&m, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let mantissa = text.trim().split('e').next().unwrap().replace('.', "");
        assert_eq!(mantissa.len(), 17);
        assert_eq!(load_matrix(&p).unwrap()[(0, 0)], std::f64::consts::PI);
    }

    #[test]
    fn empty_file_is_a_parse_failure() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("empty.csv");
        std::fs::write(&p, "").unwrap();
        assert!(matches!(load_matrix(&p), Err(Error::ParseFailure { .. })));
    }

    #[test]
    fn missing_file_is_io() {
        assert!(matches!(load_matrix("/nonexistent/m.csv"), Err(Error::Io { .. })));
    }

    #[test]
    fn ragged_csv_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        std::fs::write(&p, "1,2\n3\n").unwrap();
        assert!(matches!(load_matrix(&p), Err(Error::ParseFailure { .. })));
    }

    #[test]
    fn named_rows_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("n.csv");
        let ids = vec!["cat".to_string(), "dog".to_string()];
        let m = DMatrix::from_row_slice(2, 2, &[0.5, -1.0, 2.0, 1e-300]);
        save_named_rows(&ids, &m, &p).unwrap();
        let (ids2, m2) = load_named_rows(&p).unwrap();
        assert_eq!(ids, ids2);
        assert_eq!(m, m2);
    }

    proptest! {
        #[test]
        fn matrix_round_trip_is_lossless(
            rows in 1usize..6,
            cols in 1usize..6,
            seed in proptest::collection::vec(-1e6f64..1e6, 36),
        ) {
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("m.csv");
            let m = DMatrix::from_fn(rows, cols, |r, c| seed[r * 6 + c] / 7.0);
            save_matrix(&m, &p).unwrap();
            let back = load_matrix(&p).unwrap();
            prop_assert_eq!(back.shape(), m.shape());
            for (a, b) in m.iter().zip(back.iter()) {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
    }
}
