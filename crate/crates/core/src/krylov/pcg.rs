use super::{Preconditioner, SolveReport, Stopwatch};
use serde::{Deserialize, Serialize};
use crate::error::{Error, Result};
use crate::scalar::{axpy, dot, norm2};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PcgSettings {
    /// Relative residual target `|b - Bx| / |b|`.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for PcgSettings {
    fn default() -> Self {
        Self { tol: 1e-8, max_iterations: 1000 }
    }
}

/// Preconditioned conjugate gradients with reusable work vectors.
#[derive(Debug, Clone, Default)]
pub struct Pcg {
    r: Vec<f64>,
    z: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
    record_history: bool,
}

impl Pcg {
    pub fn new(n: usize) -> Self {
        Self { r: vec![0.0; n], z: vec![0.0; n], p: vec![0.0; n], q: vec![0.0; n], record_history: true }
    }

    /// Skips the per-iteration residual history (the march only needs counts).
    pub fn without_history(mut self) -> Self {
        self.record_history = false;
        self
    }

    /// Solves `B x = b`, using the incoming `x` as the initial guess.
    pub fn solve(
        &mut self,
        b_mat: &CsrMatrix<f64>,
        b: &[f64],
        precond: &mut dyn Preconditioner<f64>,
        settings: &PcgSettings,
        x: &mut [f64],
    ) -> Result<SolveReport> {
        let n = b_mat.nrows();
        if b.len() != n || x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: b.len().min(x.len()) });
        }
        if self.r.len() != n {
            *self = Pcg { record_history: self.record_history, ..Pcg::new(n) };
        }
        let clock = Stopwatch::start();
        let mut report = SolveReport::default();
        let bnorm = norm2(b);
        if bnorm == 0.0 {
            x.fill(0.0);
            report.residual_history.push(0.0);
            report.converged = true;
            return Ok(report);
        }
        b_mat.mul_vec_into(x, &mut self.q);
        for i in 0..n {
            self.r[i] = b[i] - self.q[i];
        }
        let mut rel = norm2(&self.r) / bnorm;
        report.residual_history.push(rel);
        if rel <= settings.tol {
            report.converged = true;
            report.wall_time = clock.seconds();
            return Ok(report);
        }
        precond.apply(&self.r, &mut self.z)?;
        self.p.copy_from_slice(&self.z);
        let mut rz = dot(&self.r, &self.z);
        for it in 1..=settings.max_iterations {
            b_mat.mul_vec_into(&self.p, &mut self.q);
            let curvature = dot(&self.p, &self.q);
            if !(curvature > 0.0) {
                return Err(Error::IndefiniteOperator { iteration: it, curvature });
            }
            let alpha = rz / curvature;
            axpy(alpha, &self.p, x);
            axpy(-alpha, &self.q, &mut self.r);
            rel = norm2(&self.r) / bnorm;
            report.iterations = it;
            if self.record_history {
                report.residual_history.push(rel);
            }
            if rel <= settings.tol {
                report.converged = true;
                break;
            }
            precond.apply(&self.r, &mut self.z)?;
            let rz_new = dot(&self.r, &self.z);
            if !(rz_new > 0.0) {
                return Err(Error::IndefiniteOperator { iteration: it, curvature: rz_new });
            }
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                self.p[i] = self.z[i] + beta * self.p[i];
            }
        }
        if !self.record_history {
            report.residual_history.push(rel);
        }
        report.wall_time = clock.seconds();
        Ok(report)
    }
}

/// One-shot PCG from a zero initial guess.
pub fn pcg(
    b_mat: &CsrMatrix<f64>,
    b: &[f64],
    precond: &mut dyn Preconditioner<f64>,
    settings: &PcgSettings,
) -> Result<(Vec<f64>, SolveReport)> {
    let mut x = vec![0.0; b_mat.nrows()];
    let report = Pcg::new(b_mat.nrows()).solve(b_mat, b, precond, settings, &mut x)?;
    Ok((x, report))
}
