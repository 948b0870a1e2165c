//! Iterative solvers: preconditioned CG for the real SPD inner systems,
//! restarted flexible GMRES for the outer complex system, symmetric
//! Gauss–Seidel and a Lanczos spectrum probe.

mod fgmres;
mod lanczos;
mod pcg;
mod smoother;

pub use fgmres::{fgmres, FgmresSettings};
pub use lanczos::{lanczos_extremes, tridiagonal_eigen_bounds};
pub use pcg::{pcg, Pcg, PcgSettings};
pub use smoother::{smoother_sgs, SymmetricGaussSeidel};

use crate::error::Result;
use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;
use serde::{Deserialize, Serialize};
use std::io::Write;

pub trait LinearOperator<T: Scalar> {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[T], y: &mut [T]);
}

impl<T: Scalar> LinearOperator<T> for CsrMatrix<T> {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, x: &[T], y: &mut [T]) {
        self.mul_vec_into(x, y);
    }
}

/// An approximate inverse applied as `z ≈ M^{-1} r`. It may change between
/// calls (inexact inner solves), which is why the outer solver is flexible.
pub trait Preconditioner<T: Scalar> {
    fn apply(&mut self, r: &[T], z: &mut [T]) -> Result<()>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPreconditioner;

impl<T: Scalar> Preconditioner<T> for IdentityPreconditioner {
    fn apply(&mut self, r: &[T], z: &mut [T]) -> Result<()> {
        z.copy_from_slice(r);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Relative residual `|b - A x_j| / |b|`; entry 0 is the initial guess.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub wall_time: f64,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::NAN)
    }

    /// First iteration at which the history drops to `level`, if any.
    pub fn iterations_to(&self, level: f64) -> Option<usize> {
        self.residual_history.iter().position(|r| *r <= level)
    }

    /// `iteration,relative_residual` CSV.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        let mut buf = String::from("iteration,relative_residual\n");
        for (k, r) in self.residual_history.iter().enumerate() {
            buf.push_str(&format!("{k},{r:e}\n"));
        }
        w.write_all(buf.as_bytes())?;
        Ok(())
    }
}

/// Wall-clock timer that degrades to zero where no clock exists (wasm32).
pub(crate) struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Self {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    pub(crate) fn seconds(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        {
            self.start.elapsed().as_secs_f64()
        }
        #[cfg(target_arch = "wasm32")]
        {
            0.0
        }
    }
}
