//! Dense matrices and bicluster views.

use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Dense row-major real matrix. `is_binary` is a validated flag: when set,
/// every entry is exactly 0 or 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
    is_binary: bool,
}

fn is_bit(v: f64) -> bool {
    v == 0.0 || v == 1.0
}

impl DataMatrix {
    /// Builds a matrix from row-major values. The binary flag is switched
    /// on automatically when every entry is 0 or 1.
    pub fn new(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "matrix must be non-empty, got {n_rows}x{n_cols}"
            )));
        }
        if values.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch {
                expected: n_rows * n_cols,
                actual: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "entry ({}, {}) is not finite",
                pos / n_cols,
                pos % n_cols
            )));
        }
        let is_binary = values.iter().all(|&v| is_bit(v));
        Ok(Self {
            n_rows,
            n_cols,
            values,
            is_binary,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * n_cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != n_cols {
                return Err(Error::DimensionMismatch {
                    expected: n_cols,
                    actual: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), n_cols, values)
    }

    /// Overrides the auto-detected binary flag. Turning it on for a matrix
    /// with non-binary entries is an error.
    pub fn with_binary(mut self, binary: bool) -> Result<Self> {
        if binary {
            if let Some(pos) = self.values.iter().position(|&v| !is_bit(v)) {
                return Err(Error::NonBinary {
                    row: pos / self.n_cols,
                    col: pos % self.n_cols,
                    value: self.values[pos],
                });
            }
        }
        self.is_binary = binary;
        Ok(self)
    }

    /// Parses headerless CSV, one matrix row per line.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut values = Vec::new();
        let mut n_cols = None;
        let mut n_rows = 0;
        for record in rdr.records() {
            let record = record.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() == 1 && record[0].is_empty() {
                continue;
            }
            match n_cols {
                None => n_cols = Some(record.len()),
                Some(c) if c != record.len() => {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected {c} fields, found {}", record.len()),
                    })
                }
                Some(_) => {}
            }
            for field in record.iter() {
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("not a number: {field:?}"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line,
                        message: format!("non-finite value {field:?}"),
                    });
                }
                values.push(v);
            }
            n_rows += 1;
        }
        let n_cols = n_cols.ok_or_else(|| Error::Parse {
            line: 1,
            message: "empty matrix".into(),
        })?;
        Self::new(n_rows, n_cols, values)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n_rows {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_binary(&self) -> bool {
        self.is_binary
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_rows).map(move |i| self.get(i, j))
    }

    pub fn transpose(&self) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for j in 0..self.n_cols {
            values.extend(self.column(j));
        }
        Self {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            values,
            is_binary: self.is_binary,
        }
    }

    /// The submatrix induced by a set of rows and a set of columns. Index
    /// lists are treated as sets: they are sorted and deduplicated.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<Bicluster<'_>> {
        Bicluster::new(self, rows, cols)
    }

    /// The whole matrix as a single bicluster.
    pub fn full_view(&self) -> Bicluster<'_> {
        Bicluster {
            source: self,
            rows: (0..self.n_rows).collect(),
            cols: (0..self.n_cols).collect(),
        }
    }
}

impl fmt::Display for DataMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n_rows {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// A view of `source` restricted to `rows` x `cols`.
#[derive(Debug, Clone)]
pub struct Bicluster<'a> {
    source: &'a DataMatrix,
    rows: Vec<usize>,
    cols: Vec<usize>,
}

fn index_set(indices: &[usize], len: usize, axis: &str) -> Result<Vec<usize>> {
    if indices.is_empty() {
        return Err(Error::InvalidArgument(format!("empty {axis} set")));
    }
    if let Some(&bad) = indices.iter().find(|&&i| i >= len) {
        return Err(Error::OutOfBounds { index: bad, len });
    }
    let mut set = indices.to_vec();
    set.sort_unstable();
    set.dedup();
    Ok(set)
}

impl<'a> Bicluster<'a> {
    pub fn new(source: &'a DataMatrix, rows: &[usize], cols: &[usize]) -> Result<Self> {
        Ok(Self {
            rows: index_set(rows, source.n_rows(), "row")?,
            cols: index_set(cols, source.n_cols(), "column")?,
            source,
        })
    }

    pub fn source(&self) -> &'a DataMatrix {
        self.source
    }

    pub fn row_set(&self) -> &[usize] {
        &self.rows
    }

    pub fn col_set(&self) -> &[usize] {
        &self.cols
    }

    /// Number of rows (n).
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Number of columns (m).
    pub fn m(&self) -> usize {
        self.cols.len()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.source.get(self.rows[i], self.cols[j])
    }

    /// All entries, row-major.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows
            .iter()
            .flat_map(move |&r| self.cols.iter().map(move |&c| self.source.get(r, c)))
    }

    pub fn row_values(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        let r = self.rows[i];
        self.cols.iter().map(move |&c| self.source.get(r, c))
    }

    pub fn col_values(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        let c = self.cols[j];
        self.rows.iter().map(move |&r| self.source.get(r, c))
    }

    pub fn is_binary(&self) -> bool {
        self.source.is_binary() || self.values().all(is_bit)
    }

    /// Copies the view into an owned matrix.
    pub fn to_matrix(&self) -> DataMatrix {
        let values: Vec<f64> = self.values().collect();
        // Entries of a valid matrix are finite, so this cannot fail.
        DataMatrix::new(self.n(), self.m(), values).expect("view of a valid matrix")
    }
}
