//! Banded LU with partial pivoting. Edge numbering keeps every assembled
//! matrix inside a band of width about two grid rows, so this is the exact
//! oracle for every grid the tests use without a dense n×n allocation.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone)]
struct BandRow<T> {
    start: usize,
    vals: Vec<T>,
}

impl<T: Scalar> BandRow<T> {
    #[inline]
    fn get(&self, c: usize) -> T {
        if c < self.start {
            return T::zero();
        }
        self.vals.get(c - self.start).copied().unwrap_or_else(T::zero)
    }

    fn end(&self) -> usize {
        self.start + self.vals.len()
    }
}

/// `P A = L U` factors of a banded matrix, stored row-wise.
#[derive(Debug, Clone)]
pub struct BandLu<T> {
    rows: Vec<BandRow<T>>,
    perm: Vec<usize>,
}

impl<T: Scalar> BandLu<T> {
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: a.ncols() });
        }
        let (kl, ku) = a.bandwidth();
        let mut rows: Vec<BandRow<T>> = (0..n)
            .map(|i| {
                let start = i.saturating_sub(kl);
                let end = (i + ku + 1).min(n);
                let mut vals = vec![T::zero(); end - start];
                let (cols, v) = a.row(i);
                for (c, x) in cols.iter().zip(v) {
                    vals[c - start] += *x;
                }
                BandRow { start, vals }
            })
            .collect();
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = rows[k].get(k).abs();
            for (r, row) in rows.iter().enumerate().take(last + 1).skip(k + 1) {
                let v = row.get(k).abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > 0.0) {
                return Err(Error::Singular(k));
            }
            rows.swap(k, p);
            perm.swap(k, p);
            let (head, tail) = rows.split_at_mut(k + 1);
            let pivot_row = &head[k];
            let pivot = pivot_row.get(k);
            let pend = pivot_row.end();
            for row in tail.iter_mut().take(last - k) {
                let ark = row.get(k);
                if ark.abs() == 0.0 {
                    continue;
                }
                let l = ark / pivot;
                if pend > row.end() {
                    let extra = pend - row.end();
                    row.vals.extend(std::iter::repeat(T::zero()).take(extra));
                }
                let off = k - row.start;
                row.vals[off] = l;
                for c in k + 1..pend {
                    let u = pivot_row.vals[c - pivot_row.start];
                    row.vals[c - row.start] -= l * u;
                }
            }
        }
        Ok(Self { rows, perm })
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: b.len() });
        }
        let mut y: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let row = &self.rows[r];
            let mut acc = y[r];
            for c in row.start..r {
                acc -= row.vals[c - row.start] * y[c];
            }
            y[r] = acc;
        }
        for r in (0..n).rev() {
            let row = &self.rows[r];
            let mut acc = y[r];
            for c in r + 1..row.end() {
                acc -= row.vals[c - row.start] * y[c];
            }
            y[r] = acc / row.vals[r - row.start];
        }
        Ok(y)
    }
}

/// Factor and solve in one call.
pub fn solve_direct<T: Scalar>(a: &CsrMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    BandLu::factor(a)?.solve(b)
}
