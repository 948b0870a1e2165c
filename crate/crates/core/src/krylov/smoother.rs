use super::Preconditioner;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use std::borrow::Borrow;

/// Symmetric Gauss–Seidel (forward then backward sweep). Used with a zero
/// start as a preconditioner it is SPD whenever the matrix is.
#[derive(Debug, Clone)]
pub struct SymmetricGaussSeidel<M> {
    matrix: M,
    inv_diag: Vec<f64>,
}

impl<M: Borrow<CsrMatrix<f64>>> SymmetricGaussSeidel<M> {
    pub fn new(matrix: M) -> Result<Self> {
        let a = matrix.borrow();
        let mut inv_diag = Vec::with_capacity(a.nrows());
        for (i, d) in a.diagonal().into_iter().enumerate() {
            if d == 0.0 || !d.is_finite() {
                return Err(Error::ZeroDiagonal(i));
            }
            inv_diag.push(1.0 / d);
        }
        Ok(Self { matrix, inv_diag })
    }

    pub fn matrix(&self) -> &CsrMatrix<f64> {
        self.matrix.borrow()
    }

    fn relax(&self, i: usize, b: &[f64], x: &mut [f64]) {
        let a = self.matrix.borrow();
        let (cols, vals) = a.row(i);
        let mut acc = b[i];
        for (c, v) in cols.iter().zip(vals) {
            if *c != i {
                acc -= v * x[*c];
            }
        }
        x[i] = acc * self.inv_diag[i];
    }

    /// Runs `sweeps` forward+backward passes on `x` in place.
    pub fn sweep(&self, b: &[f64], x: &mut [f64], sweeps: usize) {
        let n = self.inv_diag.len();
        for _ in 0..sweeps {
            for i in 0..n {
                self.relax(i, b, x);
            }
            for i in (0..n).rev() {
                self.relax(i, b, x);
            }
        }
    }
}

impl<M: Borrow<CsrMatrix<f64>>> Preconditioner<f64> for SymmetricGaussSeidel<M> {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) -> Result<()> {
        z.fill(0.0);
        self.sweep(r, z, 1);
        Ok(())
    }
}

/// Symmetric Gauss–Seidel sweeps on `B x = b` starting from `x`.
pub fn smoother_sgs(b_mat: &CsrMatrix<f64>, b: &[f64], x: &mut [f64], sweeps: usize) -> Result<()> {
    if b.len() != b_mat.nrows() || x.len() != b_mat.nrows() {
        return Err(Error::DimensionMismatch { expected: b_mat.nrows(), actual: b.len().min(x.len()) });
    }
    SymmetricGaussSeidel::new(b_mat)?.sweep(b, x, sweeps);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_recovers_rhs_in_one_sweep() {
        let i = CsrMatrix::<f64>::identity(5);
        let b = vec![1.0, 2.0, -3.0, 4.0, 0.5];
        let mut x = vec![0.0; 5];
        smoother_sgs(&i, &b, &mut x, 1).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn two_by_two_hand_computation() {
        // forward: x0 = 1/4, x1 = (2 - 1/4)/3 = 7/12; backward: x1 = 7/12, x0 = (1 - 7/12)/4 = 5/48
        let a = CsrMatrix::from_dense(&[vec![4.0, 1.0], vec![1.0, 3.0]]);
        let mut x = vec![0.0; 2];
        smoother_sgs(&a, &[1.0, 2.0], &mut x, 1).unwrap();
        assert!((x[0] - 5.0 / 48.0).abs() < 1e-15);
        assert!((x[1] - 7.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn zero_diagonal_is_rejected() {
        let a = CsrMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 3.0]]);
        assert!(matches!(SymmetricGaussSeidel::new(&a), Err(Error::ZeroDiagonal(0))));
        let mut x = vec![0.0; 2];
        assert!(smoother_sgs(&a, &[1.0, 1.0], &mut x, 1).is_err());
    }
}
