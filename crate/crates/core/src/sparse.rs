//! Compressed sparse row storage and Matrix Market coordinate IO.

use crate::error::{Error, Result};
use crate::scalar::{Scalar, C64};
use std::io::{BufRead, Write};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are
    /// summed in insertion order; explicit zeros are kept so that matrices
    /// built from the same positions share one sparsity pattern.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        for &(r, c, _) in triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::InvalidParameter(format!(
                    "triplet ({r}, {c}) outside {nrows}x{ncols}"
                )));
            }
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for k in order {
            let (r, c, v) = triplets[k];
            if last == Some((r, c)) {
                *values.last_mut().expect("entry exists") += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self { nrows, ncols, row_ptr, col_idx, values })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    pub fn from_dense(rows: &[Vec<T>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if *v != T::zero() {
                    triplets.push((i, j, *v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &triplets).expect("indices in range")
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => T::zero(),
        }
    }

    /// `y = A x` with a fixed left-to-right summation order in each row.
    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.ncols, "spmv input length");
        assert_eq!(y.len(), self.nrows, "spmv output length");
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch { expected: self.ncols, actual: x.len() });
        }
        let mut y = vec![T::zero(); self.nrows];
        self.mul_vec_into(x, &mut y);
        Ok(y)
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut triplets = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                triplets.push((*c, i, *v));
            }
        }
        Self::from_triplets(self.ncols, self.nrows, &triplets).expect("indices in range")
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::zero(); self.ncols]; self.nrows];
        for (i, row) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                row[*c] = *v;
            }
        }
        out
    }

    pub fn same_pattern<U>(&self, other: &CsrMatrix<U>) -> bool {
        self.nrows == other.nrows
            && self.ncols == other.ncols
            && self.row_ptr == other.row_ptr
            && self.col_idx == other.col_idx
    }

    /// Entrywise combination of matrices that share this pattern.
    pub fn zip_map<U: Scalar, V: Scalar>(&self, other: &CsrMatrix<U>, f: impl Fn(T, U) -> V) -> Result<CsrMatrix<V>> {
        if !self.same_pattern(other) {
            return Err(Error::InvalidParameter("matrices do not share a sparsity pattern".into()));
        }
        Ok(CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> CsrMatrix<U> {
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    /// `max |A_ij - A_ji|` over stored entries (structural asymmetry counts
    /// as the magnitude of the unmatched entry).
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                worst = worst.max((*v - self.get(*c, i)).abs());
            }
        }
        worst
    }

    /// Lower and upper bandwidths.
    pub fn bandwidth(&self) -> (usize, usize) {
        let mut lower = 0;
        let mut upper = 0;
        for i in 0..self.nrows {
            for &c in self.row(i).0 {
                if c < i {
                    lower = lower.max(i - c);
                } else {
                    upper = upper.max(c - i);
                }
            }
        }
        (lower, upper)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

impl CsrMatrix<f64> {
    /// `y = A x` for a real matrix acting on a complex vector.
    pub fn mul_complex_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.ncols, "spmv input length");
        assert_eq!(y.len(), self.nrows, "spmv output length");
        for (i, yi) in y.iter_mut().enumerate() {
            let mut re = 0.0;
            let mut im = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let a = self.values[k];
                let v = x[self.col_idx[k]];
                re += a * v.re;
                im += a * v.im;
            }
            *yi = C64::new(re, im);
        }
    }

    pub fn to_complex(&self) -> CsrMatrix<C64> {
        self.map(C64::from_real)
    }
}

/// Scalars that can be written to and read from Matrix Market files.
pub trait MarketScalar: Scalar {
    const FIELD: &'static str;
    fn write_value(&self, out: &mut String);
    fn parse_value(parts: &mut dyn Iterator<Item = &str>) -> Result<Self>;
}

fn parse_f64(tok: Option<&str>) -> Result<f64> {
    let tok = tok.ok_or_else(|| Error::Parse("missing value".into()))?;
    tok.parse::<f64>().map_err(|e| Error::Parse(format!("bad number {tok:?}: {e}")))
}

impl MarketScalar for f64 {
    const FIELD: &'static str = "real";
    fn write_value(&self, out: &mut String) {
        out.push_str(&format!("{:e}", self));
    }
    fn parse_value(parts: &mut dyn Iterator<Item = &str>) -> Result<Self> {
        parse_f64(parts.next())
    }
}

impl MarketScalar for C64 {
    const FIELD: &'static str = "complex";
    fn write_value(&self, out: &mut String) {
        out.push_str(&format!("{:e} {:e}", self.re, self.im));
    }
    fn parse_value(parts: &mut dyn Iterator<Item = &str>) -> Result<Self> {
        let re = parse_f64(parts.next())?;
        let im = parse_f64(parts.next())?;
        Ok(C64::new(re, im))
    }
}

/// Writes the matrix as Matrix Market `coordinate general` text with
/// 1-based indices and shortest round-trip value formatting.
pub fn write_matrix_market<T: MarketScalar>(m: &CsrMatrix<T>, mut w: impl Write) -> Result<()> {
    let mut buf = String::new();
    buf.push_str(&format!("%%MatrixMarket matrix coordinate {} general\n", T::FIELD));
    buf.push_str(&format!("{} {} {}\n", m.nrows, m.ncols, m.nnz()));
    for i in 0..m.nrows {
        let (cols, vals) = m.row(i);
        for (c, v) in cols.iter().zip(vals) {
            buf.push_str(&format!("{} {} ", i + 1, c + 1));
            v.write_value(&mut buf);
            buf.push('\n');
        }
    }
    w.write_all(buf.as_bytes())?;
    Ok(())
}

pub fn read_matrix_market<T: MarketScalar>(r: impl BufRead) -> Result<CsrMatrix<T>> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty file".into()))??;
    let lower = header.to_ascii_lowercase();
    if !lower.starts_with("%%matrixmarket matrix coordinate") || !lower.contains(T::FIELD) {
        return Err(Error::Parse(format!("unsupported header {header:?}, expected {} coordinate", T::FIELD)));
    }
    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let mut parts = line.split_whitespace();
        if size.is_none() {
            let mut next = || -> Result<usize> {
                parts
                    .next()
                    .ok_or_else(|| Error::Parse("short size line".into()))?
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(e.to_string()))
            };
            size = Some((next()?, next()?, next()?));
            continue;
        }
        let mut idx = || -> Result<usize> {
            let v = parts
                .next()
                .ok_or_else(|| Error::Parse(format!("short entry line {line:?}")))?
                .parse::<usize>()
                .map_err(|e| Error::Parse(e.to_string()))?;
            v.checked_sub(1).ok_or_else(|| Error::Parse("indices are 1-based".into()))
        };
        let r = idx()?;
        let c = idx()?;
        let v = T::parse_value(&mut parts)?;
        triplets.push((r, c, v));
    }
    let (nrows, ncols, nnz) = size.ok_or_else(|| Error::Parse("missing size line".into()))?;
    if nnz != triplets.len() {
        return Err(Error::Parse(format!("expected {nnz} entries, found {}", triplets.len())));
    }
    CsrMatrix::from_triplets(nrows, ncols, &triplets)
}
