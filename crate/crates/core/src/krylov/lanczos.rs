use super::LinearOperator;
use crate::error::{Error, Result};
use crate::scalar::{axpy, dot, norm2};

/// Extreme Ritz values after `steps` Lanczos iterations (full
/// reorthogonalization) from the given start vector.
pub fn lanczos_extremes(op: &dyn LinearOperator<f64>, start: &[f64], steps: usize) -> Result<(f64, f64)> {
    let n = op.dim();
    if start.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: start.len() });
    }
    let s = norm2(start);
    if s == 0.0 || steps == 0 {
        return Err(Error::InvalidParameter("Lanczos needs a nonzero start and at least one step".into()));
    }
    let mut basis: Vec<Vec<f64>> = vec![start.iter().map(|v| v / s).collect()];
    let mut alphas = Vec::with_capacity(steps);
    let mut betas: Vec<f64> = Vec::with_capacity(steps);
    let mut w = vec![0.0; n];
    for j in 0..steps.min(n) {
        op.apply(&basis[j], &mut w);
        let alpha = dot(&basis[j], &w);
        alphas.push(alpha);
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
            }
        }
        let beta = norm2(&w);
        if beta <= 1e-13 * alpha.abs().max(1e-300) || j + 1 == steps.min(n) {
            break;
        }
        betas.push(beta);
        basis.push(w.iter().map(|v| v / beta).collect());
    }
    Ok(tridiagonal_eigen_bounds(&alphas, &betas))
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let b2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { b2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest and largest eigenvalue of a symmetric tridiagonal matrix by bisection.
pub fn tridiagonal_eigen_bounds(diag: &[f64], off: &[f64]) -> (f64, f64) {
    assert!(!diag.is_empty());
    assert!(off.len() + 1 >= diag.len());
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let bisect = |target: usize| {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid == a || mid == b {
                break;
            }
            if sturm_count(&diag[..n], off, mid) > target {
                b = mid;
            } else {
                a = mid;
            }
        }
        0.5 * (a + b)
    };
    (bisect(0), bisect(n - 1))
}
