//! File formats.
//!
//! Models are JSON objects `{"n", "c_re", "c_im", "h"}` with row-major
//! `n x n` arrays. Density matrices use `{"n", "re", "im"}`. Series go to CSV
//! with a header row and floats printed to 17 significant digits.

use std::fs;
use std::io::Write;
use std::path::Path;

use qdeph_core::linalg::{CMatrix, RMatrix};
use qdeph_core::{Coefficients, Complex64, DephasingModel};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Model(#[from] qdeph_core::Error),
}

pub type IoResult<T> = Result<T, IoError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub n: usize,
    pub c_re: Vec<Vec<f64>>,
    pub c_im: Vec<Vec<f64>>,
    #[serde(default)]
    pub h: Option<Vec<Vec<f64>>>,
}

fn rows_of(m: &RMatrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix_of(name: &str, n: usize, rows: &[Vec<f64>]) -> IoResult<RMatrix> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(IoError::Format(format!("{name} must be a {n} x {n} array")));
    }
    Ok(RMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn complex_of(name: &str, n: usize, re: &[Vec<f64>], im: &[Vec<f64>]) -> IoResult<CMatrix> {
    let (re, im) =
        (matrix_of(&format!("{name} real part"), n, re)?, matrix_of(&format!("{name} imaginary part"), n, im)?);
    Ok(CMatrix::from_fn(n, n, |i, j| Complex64::new(re[(i, j)], im[(i, j)])))
}

impl ModelFile {
    pub fn from_model<M: Coefficients + ?Sized>(m: &M) -> Self {
        Self {
            n: m.n(),
            c_re: rows_of(&m.c().map(|z| z.re)),
            c_im: rows_of(&m.c().map(|z| z.im)),
            h: Some(rows_of(m.h())),
        }
    }

    pub fn into_model(self) -> IoResult<DephasingModel> {
        let n = self.n;
        if n == 0 {
            return Err(IoError::Format("n must be at least 1".into()));
        }
        let c = complex_of("c", n, &self.c_re, &self.c_im)?;
        let h = match &self.h {
            Some(rows) => matrix_of("h", n, rows)?,
            None => RMatrix::zeros(n, n),
        };
        Ok(DephasingModel::new(n, c, h)?)
    }
}

pub fn model_from_json(text: &str) -> IoResult<DephasingModel> {
    serde_json::from_str::<ModelFile>(text)?.into_model()
}

pub fn model_to_json<M: Coefficients + ?Sized>(m: &M) -> String {
    serde_json::to_string_pretty(&ModelFile::from_model(m)).expect("plain data serializes")
}

pub fn read_text(path: &Path) -> IoResult<String> {
    fs::read_to_string(path).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

pub fn read_model(path: &Path) -> IoResult<DephasingModel> {
    model_from_json(&read_text(path)?)
}

pub fn write_text(path: &Path, text: &str) -> IoResult<()> {
    fs::write(path, text).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityFile {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl DensityFile {
    pub fn from_matrix(n: usize, rho: &CMatrix) -> Self {
        Self { n, re: rows_of(&rho.map(|z| z.re)), im: rows_of(&rho.map(|z| z.im)) }
    }

    pub fn into_matrix(self) -> IoResult<CMatrix> {
        if self.n > 16 {
            return Err(IoError::Format("density matrices are limited to 16 qubits".into()));
        }
        complex_of("rho", 1 << self.n, &self.re, &self.im)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => fmt_float(*x),
            Cell::Int(k) => k.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

pub fn write_csv<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<Cell>>) -> IoResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(IoError::Format(format!("row has {} cells, header has {}", row.len(), header.len())));
        }
        w.write_record(row.iter().map(Cell::render))?;
    }
    w.flush()?;
    Ok(())
}

/// Numeric CSV columns keyed by header.
pub fn read_csv_columns(text: &str) -> IoResult<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    let mut cols = vec![Vec::new(); header.len()];
    for rec in r.records() {
        let rec = rec?;
        for (k, field) in rec.iter().enumerate() {
            let v = field.parse::<f64>().map_err(|e| IoError::Format(format!("column {}: {e}", header[k])))?;
            cols[k].push(v);
        }
    }
    Ok((header, cols))
}
