use super::{LinearOperator, Preconditioner, SolveReport, Stopwatch};
use serde::{Deserialize, Serialize};
use crate::error::{Error, Result};
use crate::scalar::{axpy, dot, norm2, Scalar};

/// Second Gram–Schmidt pass is applied when the projections left after the
/// first pass exceed this fraction of the new vector's norm.
const REORTH_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FgmresSettings {
    /// Krylov dimension per cycle (the `k` in GMRES(k)).
    pub restart: usize,
    pub tol: f64,
    /// Cap on the total number of Arnoldi steps over all cycles.
    pub max_iterations: usize,
}

impl Default for FgmresSettings {
    fn default() -> Self {
        Self { restart: 100, tol: 1e-8, max_iterations: 1000 }
    }
}

/// Complex-capable Givens rotation `[c s; -conj(s) c]` mapping `(a, b)` to `(r, 0)`.
fn givens<T: Scalar>(a: T, b: T) -> (f64, T, T) {
    let bn = b.abs();
    if bn == 0.0 {
        return (1.0, T::zero(), a);
    }
    let an = a.abs();
    if an == 0.0 {
        return (0.0, b.conj() * (1.0 / bn), T::from_real(bn));
    }
    let t = an.hypot(bn);
    let phase = a * (1.0 / an);
    (an / t, phase * b.conj() * (1.0 / t), phase * t)
}

fn residual<T: Scalar>(a: &dyn LinearOperator<T>, b: &[T], x: &[T], r: &mut [T]) -> f64 {
    a.apply(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = *bi - *ri;
    }
    norm2(r)
}

/// Restarted flexible GMRES with right preconditioning.
///
/// Each step stores the preconditioned direction, so the preconditioner may
/// vary between applications. The recorded history holds the true relative
/// residual `|b - A x_j| / |b|` of the current iterate after every step; an
/// unconverged run is not an error and returns its full history.
pub fn fgmres<T: Scalar>(
    a: &dyn LinearOperator<T>,
    b: &[T],
    mut precond: Option<&mut dyn Preconditioner<T>>,
    settings: &FgmresSettings,
) -> Result<(Vec<T>, SolveReport)> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: b.len() });
    }
    if settings.restart < 1 {
        return Err(Error::InvalidParameter("restart length must be at least 1".into()));
    }
    let clock = Stopwatch::start();
    let k = settings.restart;
    let mut report = SolveReport::default();
    let mut x = vec![T::zero(); n];
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        report.residual_history.push(0.0);
        report.converged = true;
        return Ok((x, report));
    }
    let mut r = b.to_vec();
    let mut beta = bnorm;
    report.residual_history.push(1.0);
    if 1.0 <= settings.tol {
        report.converged = true;
        return Ok((x, report));
    }

    let mut w = vec![T::zero(); n];
    let mut xj = vec![T::zero(); n];
    let mut rj = vec![T::zero(); n];
    let mut total = 0usize;

    'cycles: while total < settings.max_iterations && beta > 0.0 {
        let mut basis: Vec<Vec<T>> = Vec::with_capacity(k + 1);
        let mut dirs: Vec<Vec<T>> = Vec::with_capacity(k);
        let mut hcols: Vec<Vec<T>> = Vec::with_capacity(k);
        let mut rot_c: Vec<f64> = Vec::with_capacity(k);
        let mut rot_s: Vec<T> = Vec::with_capacity(k);
        let mut g = vec![T::zero(); k + 1];
        g[0] = T::from_real(beta);
        basis.push(r.iter().map(|v| *v * (1.0 / beta)).collect());
        let mut rel = beta / bnorm;

        for j in 0..k {
            if total >= settings.max_iterations {
                break;
            }
            let mut z = vec![T::zero(); n];
            match precond.as_deref_mut() {
                Some(p) => p.apply(&basis[j], &mut z)?,
                None => z.copy_from_slice(&basis[j]),
            }
            a.apply(&z, &mut w);
            let before = norm2(&w);

            let mut h = vec![T::zero(); j + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(v, &w);
                axpy(-hij, v, &mut w);
                h[i] = hij;
            }
            let mut wn = norm2(&w);
            if wn > 0.0 {
                let second: Vec<T> = basis.iter().map(|v| dot(v, &w)).collect();
                let loss = second.iter().map(|c| c.abs()).fold(0.0, f64::max) / wn;
                if loss > REORTH_THRESHOLD {
                    for (i, (v, c)) in basis.iter().zip(&second).enumerate() {
                        axpy(-*c, v, &mut w);
                        h[i] += *c;
                    }
                    wn = norm2(&w);
                }
            }
            h[j + 1] = T::from_real(wn);

            for i in 0..j {
                let (c, s) = (rot_c[i], rot_s[i]);
                let hi = h[i];
                let hn = h[i + 1];
                h[i] = hi * c + s * hn;
                h[i + 1] = hn * c - s.conj() * hi;
            }
            let (c, s, rr) = givens(h[j], h[j + 1]);
            h[j] = rr;
            h[j + 1] = T::zero();
            rot_c.push(c);
            rot_s.push(s);
            g[j + 1] = -(s.conj() * g[j]);
            g[j] = g[j] * c;
            hcols.push(h);
            dirs.push(z);
            total += 1;

            // current iterate x_j = x + Z y with H y = g (upper triangular)
            let m = j + 1;
            let mut y = vec![T::zero(); m];
            let mut singular = false;
            for i in (0..m).rev() {
                let mut acc = g[i];
                for l in i + 1..m {
                    acc -= hcols[l][i] * y[l];
                }
                let d = hcols[i][i];
                if d.abs() == 0.0 {
                    singular = true;
                    break;
                }
                y[i] = acc / d;
            }
            if singular {
                // degenerate direction; keep the previous iterate
                report.residual_history.push(rel);
                break;
            }
            xj.copy_from_slice(&x);
            for (zl, yl) in dirs.iter().zip(&y) {
                axpy(*yl, zl, &mut xj);
            }
            rel = residual(a, b, &xj, &mut rj) / bnorm;
            report.residual_history.push(rel);
            if rel <= settings.tol {
                x.copy_from_slice(&xj);
                report.converged = true;
                break 'cycles;
            }
            if !(wn > 1e-14 * before) {
                // Krylov space exhausted
                break;
            }
            basis.push(w.iter().map(|v| *v * (1.0 / wn)).collect());
        }
        if dirs.is_empty() {
            break;
        }
        if !report.converged {
            x.copy_from_slice(&xj);
            r.copy_from_slice(&rj);
            beta = norm2(&r);
        }
    }
    report.iterations = total;
    report.wall_time = clock.seconds();
    Ok((x, report))
}
