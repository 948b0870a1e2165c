//! Laguerre-in-time preconditioner.
//!
//! A residual `r` is treated as the spatial profile of the source
//! `r·exp(iωt)·Π(t-τ)`. The Laguerre coefficients of the resulting
//! time-domain field solve `B E_m = c_m r - M_ε Φ2(E) - D Φ1(E)`, one real
//! definite system per index and part, and the field spectrum at ω is
//! resummed from them.

use crate::assembly::AssembledOperators;
use crate::error::{Error, Result};
use crate::krylov::{Pcg, PcgSettings, Preconditioner, SolveReport, SymmetricGaussSeidel};
use crate::laguerre::{synthesis_weight, window_source_coeffs, LaguerreConfig, RecurrenceState};
use crate::scalar::{norm2, C64};
use crate::sparse::CsrMatrix;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::sync::Arc;

/// PCG with a symmetric Gauss–Seidel preconditioner on one fixed SPD matrix.
#[derive(Debug, Clone)]
pub struct InnerSolver {
    matrix: Arc<CsrMatrix<f64>>,
    smoother: SymmetricGaussSeidel<Arc<CsrMatrix<f64>>>,
    pcg: Pcg,
    pub settings: PcgSettings,
}

impl InnerSolver {
    pub fn new(b: CsrMatrix<f64>, settings: PcgSettings) -> Result<Self> {
        let n = b.nrows();
        let matrix = Arc::new(b);
        let smoother = SymmetricGaussSeidel::new(Arc::clone(&matrix))?;
        Ok(Self { matrix, smoother, pcg: Pcg::new(n).without_history(), settings })
    }

    pub fn matrix(&self) -> &CsrMatrix<f64> {
        &self.matrix
    }

    /// Solves `B x = rhs` from a zero initial guess.
    pub fn solve(&mut self, rhs: &[f64], x: &mut [f64]) -> Result<SolveReport> {
        x.fill(0.0);
        self.solve_from(rhs, x)
    }

    /// Solves `B x = rhs` starting from the incoming `x`.
    pub fn solve_from(&mut self, rhs: &[f64], x: &mut [f64]) -> Result<SolveReport> {
        self.pcg.solve(&self.matrix, rhs, &mut self.smoother, &self.settings, x)
    }
}

/// Right-hand sides of the coefficient march for one real field component:
/// `source - second·Φ2 - first·Φ1` over the coefficients pushed so far.
#[derive(Debug, Clone)]
pub struct CoefficientMarch {
    eta: f64,
    state: RecurrenceState<Vec<f64>>,
    rhs: Vec<f64>,
    phi: Vec<f64>,
}

impl CoefficientMarch {
    pub fn new(n: usize, eta: f64) -> Self {
        Self { eta, state: RecurrenceState::new(vec![0.0; n]), rhs: vec![0.0; n], phi: vec![0.0; n] }
    }

    pub fn index(&self) -> usize {
        self.state.index()
    }

    pub fn reset(&mut self) {
        self.state.reset();
    }

    pub fn rhs(&mut self, source: &[f64], second: &CsrMatrix<f64>, first: Option<&CsrMatrix<f64>>) -> &[f64] {
        let (s0, s1) = (self.state.sum(), self.state.weighted_sum());
        let m = self.state.index() as f64;
        let e2 = self.eta * self.eta;
        for i in 0..self.phi.len() {
            self.phi[i] = e2 * (m * s0[i] - s1[i]);
        }
        second.mul_vec_into(&self.phi, &mut self.rhs);
        for (r, s) in self.rhs.iter_mut().zip(source) {
            *r = *s - *r;
        }
        if let Some(first) = first {
            for (p, s) in self.phi.iter_mut().zip(s0) {
                *p = self.eta * s;
            }
            let rows = first.nrows();
            for i in 0..rows {
                let (cols, vals) = first.row(i);
                let mut acc = 0.0;
                for (c, v) in cols.iter().zip(vals) {
                    acc += v * self.phi[*c];
                }
                self.rhs[i] -= acc;
            }
        }
        &self.rhs
    }

    pub fn push(&mut self, coeff: &Vec<f64>) {
        self.state.push(coeff);
    }
}

/// One real component of the march with its last two coefficients.
struct MarchPart {
    march: CoefficientMarch,
    current: Vec<f64>,
    previous: Vec<f64>,
}

impl MarchPart {
    fn new(n: usize, eta: f64) -> Self {
        Self { march: CoefficientMarch::new(n, eta), current: vec![0.0; n], previous: vec![0.0; n] }
    }

    fn step(
        &mut self,
        inner: &mut InnerSolver,
        source: &[f64],
        second: &CsrMatrix<f64>,
        first: Option<&CsrMatrix<f64>>,
        extrapolate: bool,
    ) -> Result<SolveReport> {
        let m = self.march.index();
        let rhs = self.march.rhs(source, second, first);
        for (c, p) in self.current.iter_mut().zip(self.previous.iter_mut()) {
            let last = *c;
            *c = match (extrapolate, m) {
                (false, _) | (true, 0) => 0.0,
                (true, 1) => -last,
                _ => -2.0 * last - *p,
            };
            *p = last;
        }
        let rep = inner.solve_from(rhs, &mut self.current)?;
        self.march.push(&self.current);
        Ok(rep)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LaguerreSettings {
    pub inner: PcgSettings,
    /// March exactly this many coefficients instead of truncating adaptively.
    pub fixed_terms: Option<usize>,
    /// Consecutive sub-threshold contributions that end the march.
    pub window: usize,
    /// Start each inner solve from `-2E_{m-1} - E_{m-2}`. Coefficients of
    /// signals slow on the `1/eta` scale alternate in sign with a smooth
    /// envelope, which this extrapolates.
    pub extrapolate: bool,
}

impl Default for LaguerreSettings {
    fn default() -> Self {
        Self { inner: PcgSettings::default(), fixed_terms: None, window: 5, extrapolate: true }
    }
}

/// Per-application diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ApplyStats {
    /// Coefficients marched (`M*`).
    pub terms: usize,
    pub inner_iterations: usize,
    /// Worst relative residual any inner solve stopped at.
    pub max_inner_residual: f64,
}

#[derive(Debug, Clone)]
pub struct LaguerrePreconditioner {
    inner: InnerSolver,
    m_eps: CsrMatrix<f64>,
    damping: Option<CsrMatrix<f64>>,
    config: LaguerreConfig,
    omega: f64,
    source: Vec<C64>,
    weights: Vec<C64>,
    pub settings: LaguerreSettings,
    scale: f64,
    stats: Vec<ApplyStats>,
    keep_coefficients: bool,
    coefficients: Vec<Vec<C64>>,
}

impl LaguerrePreconditioner {
    pub fn new(ops: &AssembledOperators, config: LaguerreConfig, settings: LaguerreSettings) -> Result<Self> {
        config.validate()?;
        if settings.window == 0 {
            return Err(Error::InvalidParameter("truncation window must be at least 1".into()));
        }
        let limit = settings.fixed_terms.unwrap_or(config.m_max);
        if limit == 0 || limit > config.m_max {
            return Err(Error::InvalidParameter(format!(
                "series length {limit} must lie in 1..={}",
                config.m_max
            )));
        }
        if (ops.eta - config.eta).abs() > 0.0 {
            return Err(Error::InvalidParameter(format!(
                "operators assembled for eta = {} but config has eta = {}",
                ops.eta, config.eta
            )));
        }
        let source = window_source_coeffs(ops.omega, &config, config.m_max)?;
        let weights = (0..config.m_max).map(|m| synthesis_weight(m, ops.omega, config.eta)).collect();
        let damping = (ops.damping.max_abs() > 0.0).then(|| ops.damping.clone());
        Ok(Self {
            inner: InnerSolver::new(ops.b.clone(), settings.inner)?,
            m_eps: ops.parts.m_eps.clone(),
            damping,
            config,
            omega: ops.omega,
            source,
            weights,
            settings,
            scale: 1.0,
            stats: Vec::new(),
            keep_coefficients: false,
            coefficients: Vec::new(),
        })
    }

    pub fn config(&self) -> &LaguerreConfig {
        &self.config
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn dim(&self) -> usize {
        self.m_eps.nrows()
    }

    /// Source coefficients `c_m` of the windowed harmonic.
    pub fn source_coeffs(&self) -> &[C64] {
        &self.source
    }

    /// Multiplies every output by a constant (right preconditioning is
    /// insensitive to it; exposed to check exactly that).
    pub fn set_scale(&mut self, scale: f64) {
        self.scale = scale;
    }

    /// Keep the marched coefficients of the most recent application.
    pub fn keep_coefficients(&mut self, on: bool) {
        self.keep_coefficients = on;
    }

    pub fn coefficients(&self) -> &[Vec<C64>] {
        &self.coefficients
    }

    pub fn stats(&self) -> &[ApplyStats] {
        &self.stats
    }

    pub fn last_stats(&self) -> Option<ApplyStats> {
        self.stats.last().copied()
    }

    pub fn inner_matrix(&self) -> &CsrMatrix<f64> {
        self.inner.matrix()
    }

    pub fn mass(&self) -> &CsrMatrix<f64> {
        &self.m_eps
    }

    pub fn damping(&self) -> Option<&CsrMatrix<f64>> {
        self.damping.as_ref()
    }

    /// `apply` followed by returning the number of coefficients it needed,
    /// always with adaptive truncation.
    pub fn estimate_series_length(&mut self, probe: &[C64]) -> Result<usize> {
        let saved = self.settings.fixed_terms.take();
        let mut z = vec![C64::new(0.0, 0.0); probe.len()];
        let out = self.apply_inner(probe, &mut z);
        self.settings.fixed_terms = saved;
        out?;
        Ok(self.stats.last().map_or(0, |s| s.terms))
    }

    fn apply_inner(&mut self, r: &[C64], z: &mut [C64]) -> Result<()> {
        let n = self.dim();
        if r.len() != n || z.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: r.len().min(z.len()) });
        }
        let limit = self.settings.fixed_terms.unwrap_or(self.config.m_max).min(self.config.m_max);
        let eta = self.config.eta;
        let (r_re, r_im): (Vec<f64>, Vec<f64>) = r.iter().map(|v| (v.re, v.im)).unzip();
        let mut parts = [MarchPart::new(n, eta), MarchPart::new(n, eta)];
        let mut src = vec![0.0; n];
        z.fill(C64::new(0.0, 0.0));
        self.coefficients.clear();
        let mut stats = ApplyStats::default();
        let mut quiet = 0usize;
        for m in 0..limit {
            let c = self.source[m];
            for (k, part) in parts.iter_mut().enumerate() {
                for i in 0..n {
                    src[i] = if k == 0 {
                        c.re * r_re[i] - c.im * r_im[i]
                    } else {
                        c.re * r_im[i] + c.im * r_re[i]
                    };
                }
                let rep = part
                    .step(&mut self.inner, &src, &self.m_eps, self.damping.as_ref(), self.settings.extrapolate)
                    .map_err(|e| Error::InnerSolve { index: m, source: Box::new(e) })?;
                stats.inner_iterations += rep.iterations;
                stats.max_inner_residual = stats.max_inner_residual.max(rep.final_residual());
            }
            let [re, im] = &parts;
            let (e_re, e_im) = (&re.current, &im.current);
            let w = self.weights[m];
            for i in 0..n {
                z[i] += w * C64::new(e_re[i], e_im[i]);
            }
            if self.keep_coefficients {
                self.coefficients.push(e_re.iter().zip(e_im.iter()).map(|(a, b)| C64::new(*a, *b)).collect());
            }
            stats.terms = m + 1;
            if self.settings.fixed_terms.is_none() {
                let contribution = w.norm() * norm2(e_re).hypot(norm2(e_im));
                if contribution <= self.config.eps_lag * norm2(z) {
                    quiet += 1;
                    if quiet >= self.settings.window {
                        break;
                    }
                } else {
                    quiet = 0;
                }
            }
        }
        if self.scale != 1.0 {
            for v in z.iter_mut() {
                *v *= self.scale;
            }
        }
        self.stats.push(stats);
        Ok(())
    }

    /// `apply,terms,inner_iterations,max_inner_residual` CSV of all applications so far.
    pub fn write_stats_csv(&self, w: impl Write) -> Result<()> {
        write_apply_stats(&self.stats, w)
    }
}

/// `apply,terms,inner_iterations,max_inner_residual` rows.
pub fn write_apply_stats(stats: &[ApplyStats], mut w: impl Write) -> Result<()> {
    let mut buf = String::from("apply,terms,inner_iterations,max_inner_residual\n");
    for (k, s) in stats.iter().enumerate() {
        buf.push_str(&format!("{k},{},{},{:e}\n", s.terms, s.inner_iterations, s.max_inner_residual));
    }
    w.write_all(buf.as_bytes())?;
    Ok(())
}

impl Preconditioner<C64> for LaguerrePreconditioner {
    fn apply(&mut self, r: &[C64], z: &mut [C64]) -> Result<()> {
        self.apply_inner(r, z)
    }
}
