//! Scalar wave/Helmholtz testbed on a finite-difference grid.
//!
//! Unknowns sit on interior nodes with homogeneous Dirichlet data. With
//! `L = -Δ_h` and `W = diag(1/v²)` the time-domain problem is
//! `W(u_tt + γ u_t) + L u = f g(t)` and, for `exp(iωt)` dependence, the
//! frequency-domain one is `(L - ω²(1 - iδ)W) ũ = f` with `γ = δω`.

use crate::direct::BandLu;
use crate::error::{Error, Result};
use crate::krylov::PcgSettings;
use crate::laguerre::{synthesis_weight, window_source_coeffs, LaguerreConfig, LaguerreSeries};
use crate::preconditioner::{CoefficientMarch, InnerSolver};
use crate::scalar::C64;
use crate::sparse::CsrMatrix;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarGrid {
    /// Cells along x.
    pub nx: usize,
    /// Cells along y; `0` makes a line of `nx - 1` unknowns.
    pub ny: usize,
    pub h: f64,
    /// Wave speed per unknown (row-major, `x` fastest).
    pub speed: Vec<f64>,
}

impl ScalarGrid {
    pub fn homogeneous(nx: usize, ny: usize, h: f64, v: f64) -> Result<Self> {
        let n = Self::count(nx, ny);
        Self::new(nx, ny, h, vec![v; n])
    }

    pub fn new(nx: usize, ny: usize, h: f64, speed: Vec<f64>) -> Result<Self> {
        if nx < 2 || ny == 1 {
            return Err(Error::Geometry(format!("grid needs at least one interior node, got {nx}x{ny}")));
        }
        if !(h > 0.0) {
            return Err(Error::Geometry(format!("spacing must be positive, got {h}")));
        }
        let n = Self::count(nx, ny);
        if speed.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: speed.len() });
        }
        if let Some(k) = speed.iter().position(|v| !(*v > 0.0)) {
            return Err(Error::InvalidParameter(format!("wave speed at node {k} is not positive")));
        }
        Ok(Self { nx, ny, h, speed })
    }

    fn count(nx: usize, ny: usize) -> usize {
        if ny == 0 {
            nx.saturating_sub(1)
        } else {
            nx.saturating_sub(1) * ny.saturating_sub(1)
        }
    }

    pub fn n(&self) -> usize {
        self.speed.len()
    }

    pub fn is_line(&self) -> bool {
        self.ny == 0
    }

    /// Coordinates of unknown `k` (the domain starts at the origin).
    pub fn coords(&self, k: usize) -> [f64; 2] {
        let w = self.nx - 1;
        let (i, j) = (k % w + 1, k / w + if self.is_line() { 0 } else { 1 });
        [i as f64 * self.h, j as f64 * self.h]
    }

    /// Unknown nearest to `p`; ties go to the lowest index.
    pub fn nearest(&self, p: [f64; 2]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for k in 0..self.n() {
            let c = self.coords(k);
            let d = (c[0] - p[0]).hypot(c[1] - p[1]);
            if d < best.0 {
                best = (d, k);
            }
        }
        best.1
    }

    /// `-Δ_h` with Dirichlet data.
    pub fn laplacian(&self) -> CsrMatrix<f64> {
        let w = self.nx - 1;
        let rows = if self.is_line() { 1 } else { self.ny - 1 };
        let inv = 1.0 / (self.h * self.h);
        let diag = if self.is_line() { 2.0 } else { 4.0 };
        let mut t = Vec::with_capacity(5 * self.n());
        for j in 0..rows {
            for i in 0..w {
                let k = j * w + i;
                t.push((k, k, diag * inv));
                if i > 0 {
                    t.push((k, k - 1, -inv));
                }
                if i + 1 < w {
                    t.push((k, k + 1, -inv));
                }
                if !self.is_line() {
                    if j > 0 {
                        t.push((k, k - w, -inv));
                    }
                    if j + 1 < rows {
                        t.push((k, k + w, -inv));
                    }
                }
            }
        }
        CsrMatrix::from_triplets(self.n(), self.n(), &t).expect("in range")
    }

    /// `diag(1/v²)`.
    pub fn weight(&self) -> CsrMatrix<f64> {
        let t: Vec<_> = self.speed.iter().enumerate().map(|(k, v)| (k, k, 1.0 / (v * v))).collect();
        CsrMatrix::from_triplets(self.n(), self.n(), &t).expect("in range")
    }

    /// Discrete delta at the node nearest `p` (unit integral).
    pub fn point_source(&self, p: [f64; 2]) -> Vec<f64> {
        let mut f = vec![0.0; self.n()];
        let cell = if self.is_line() { self.h } else { self.h * self.h };
        f[self.nearest(p)] = 1.0 / cell;
        f
    }
}

/// Damped Helmholtz solve `(L - ω²(1 - iδ)W) ũ = f` by banded LU.
pub fn helmholtz_direct(grid: &ScalarGrid, omega: f64, delta: f64, f: &[f64]) -> Result<Vec<C64>> {
    if f.len() != grid.n() {
        return Err(Error::DimensionMismatch { expected: grid.n(), actual: f.len() });
    }
    let shift = C64::new(-omega * omega, omega * omega * delta);
    let a = grid.laplacian().zip_map(&grid.weight_full_pattern(), |l, w| C64::new(l, 0.0) + shift * w)?;
    let rhs: Vec<C64> = f.iter().map(|v| C64::new(*v, 0.0)).collect();
    BandLu::factor(&a)?.solve(&rhs)
}

impl ScalarGrid {
    /// `W` on the sparsity pattern of the Laplacian.
    fn weight_full_pattern(&self) -> CsrMatrix<f64> {
        let l = self.laplacian();
        let mut t = Vec::with_capacity(l.nnz());
        for i in 0..l.nrows() {
            for &c in l.row(i).0 {
                let v = if c == i { 1.0 / (self.speed[i] * self.speed[i]) } else { 0.0 };
                t.push((i, c, v));
            }
        }
        CsrMatrix::from_triplets(l.nrows(), l.ncols(), &t).expect("in range")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TestbedSettings {
    /// Relative absorption δ; the march uses the matching rate `γ = δω`.
    pub delta: f64,
    pub inner: PcgSettings,
    /// March exactly this many terms; otherwise stop like the preconditioner.
    pub fixed_terms: Option<usize>,
    /// Nodes whose full coefficient sequences are kept.
    pub record_nodes: Vec<usize>,
    /// Keep every coefficient vector (memory `M × n`).
    pub keep_all: bool,
}

impl Default for TestbedSettings {
    fn default() -> Self {
        Self {
            delta: 1e-2,
            inner: PcgSettings { tol: 1e-10, max_iterations: 2000 },
            fixed_terms: None,
            record_nodes: Vec::new(),
            keep_all: false,
        }
    }
}

/// Outcome of the scalar coefficient march.
#[derive(Debug, Clone)]
pub struct WaveMarch {
    pub config: LaguerreConfig,
    pub omega: f64,
    /// `(η/2) Σ u_m φ̃_m(ω)` per node.
    pub spectrum: Vec<C64>,
    /// Same synthesis applied to the source coefficients `c_m`.
    pub source_spectrum: C64,
    pub terms: usize,
    pub inner_iterations: usize,
    /// Laguerre series of `u` at each recorded node.
    pub traces: Vec<LaguerreSeries>,
    /// All coefficient vectors when requested.
    pub coeffs: Vec<Vec<C64>>,
}

impl WaveMarch {
    /// Spectrum divided by the synthesized source spectrum: the amplitude
    /// that the limiting-amplitude principle predicts equals `ũ`.
    pub fn amplitude(&self) -> Vec<C64> {
        if self.source_spectrum.norm() == 0.0 {
            return vec![C64::new(0.0, 0.0); self.spectrum.len()];
        }
        self.spectrum.iter().map(|s| s / self.source_spectrum).collect()
    }
}

/// Laguerre march for `W(u_tt + γu_t) + Lu = f exp(iωt) Π(t - τ)`.
pub fn wave_laguerre_march(
    grid: &ScalarGrid,
    omega: f64,
    f: &[f64],
    config: &LaguerreConfig,
    settings: &TestbedSettings,
) -> Result<WaveMarch> {
    config.validate()?;
    let n = grid.n();
    if f.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: f.len() });
    }
    if !(settings.delta >= 0.0) {
        return Err(Error::InvalidParameter(format!("absorption must be nonnegative, got {}", settings.delta)));
    }
    if let Some(&k) = settings.record_nodes.iter().find(|k| **k >= n) {
        return Err(Error::InvalidParameter(format!("record node {k} out of range")));
    }
    let eta = config.eta;
    let gamma = settings.delta * omega;
    let w = grid.weight_full_pattern();
    let damping = w.map(|x| gamma * x);
    let b = grid.laplacian().zip_map(&w, |l, x| l + (0.25 * eta * eta + 0.5 * gamma * eta) * x)?;
    let mut inner = InnerSolver::new(b, settings.inner)?;
    let limit = settings.fixed_terms.unwrap_or(config.m_max).min(config.m_max);
    let c = window_source_coeffs(omega, config, limit)?;

    let first = (gamma > 0.0).then_some(&damping);
    let mut marches = [CoefficientMarch::new(n, eta), CoefficientMarch::new(n, eta)];
    let mut parts = [vec![0.0; n], vec![0.0; n]];
    let mut src = vec![0.0; n];
    let mut spectrum = vec![C64::new(0.0, 0.0); n];
    let mut source_spectrum = C64::new(0.0, 0.0);
    let mut traces: Vec<Vec<C64>> = vec![Vec::new(); settings.record_nodes.len()];
    let mut coeffs = Vec::new();
    let mut inner_iterations = 0;
    let mut quiet = 0;
    let mut terms = 0;
    for (m, cm) in c.iter().enumerate() {
        for k in 0..2 {
            let scale = if k == 0 { cm.re } else { cm.im };
            for (s, fv) in src.iter_mut().zip(f) {
                *s = scale * fv;
            }
            let rhs = marches[k].rhs(&src, &w, first);
            let rep = inner
                .solve(rhs, &mut parts[k])
                .map_err(|e| Error::InnerSolve { index: m, source: Box::new(e) })?;
            inner_iterations += rep.iterations;
            marches[k].push(&parts[k]);
        }
        let weight = synthesis_weight(m, omega, eta);
        source_spectrum += weight * cm;
        let mut contribution = 0.0;
        let mut total = 0.0;
        for i in 0..n {
            let u = C64::new(parts[0][i], parts[1][i]);
            let d = weight * u;
            spectrum[i] += d;
            contribution += d.norm_sqr();
            total += spectrum[i].norm_sqr();
        }
        for (trace, &node) in traces.iter_mut().zip(&settings.record_nodes) {
            trace.push(C64::new(parts[0][node], parts[1][node]));
        }
        if settings.keep_all {
            coeffs.push(parts[0].iter().zip(&parts[1]).map(|(a, b)| C64::new(*a, *b)).collect());
        }
        terms = m + 1;
        if settings.fixed_terms.is_none() {
            if contribution.sqrt() <= config.eps_lag * total.sqrt() {
                quiet += 1;
                if quiet >= 5 {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
    }
    let traces = traces.into_iter().map(|t| LaguerreSeries::new(*config, t)).collect::<Result<_>>()?;
    Ok(WaveMarch { config: *config, omega, spectrum, source_spectrum, terms, inner_iterations, traces, coeffs })
}

/// Relative ℓ2 distance between the march amplitude and the direct damped
/// Helmholtz solution over nodes at least five cells from `source`.
#[derive(Debug, Clone)]
pub struct AmplitudeComparison {
    pub relative_error: f64,
    pub direct: Vec<C64>,
    pub march: WaveMarch,
}

pub fn limiting_amplitude_check(
    grid: &ScalarGrid,
    omega: f64,
    f: &[f64],
    config: &LaguerreConfig,
    settings: &TestbedSettings,
    source: [f64; 2],
) -> Result<AmplitudeComparison> {
    let direct = helmholtz_direct(grid, omega, settings.delta, f)?;
    let march = wave_laguerre_march(grid, omega, f, config, settings)?;
    let amp = march.amplitude();
    let cutoff = 5.0 * grid.h * (1.0 - 1e-12);
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..grid.n() {
        let p = grid.coords(k);
        if (p[0] - source[0]).hypot(p[1] - source[1]) < cutoff {
            continue;
        }
        num += (amp[k] - direct[k]).norm_sqr();
        den += direct[k].norm_sqr();
    }
    let relative_error = if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (num / den).sqrt()
    };
    Ok(AmplitudeComparison { relative_error, direct, march })
}

/// `x,y,re,im` rows for a nodal field.
pub fn write_field_csv(grid: &ScalarGrid, field: &[C64], mut w: impl Write) -> Result<()> {
    if field.len() != grid.n() {
        return Err(Error::DimensionMismatch { expected: grid.n(), actual: field.len() });
    }
    let mut buf = String::from("x,y,re,im\n");
    for (k, v) in field.iter().enumerate() {
        let p = grid.coords(k);
        buf.push_str(&format!("{},{},{:e},{:e}\n", p[0], p[1], v.re, v.im));
    }
    w.write_all(buf.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_source_gives_zero_fields() {
        let g = ScalarGrid::homogeneous(8, 8, 1.0, 1.0).unwrap();
        let f = vec![0.0; g.n()];
        assert!(helmholtz_direct(&g, 0.5, 1e-2, &f).unwrap().iter().all(|v| v.norm() == 0.0));
        let cfg = LaguerreConfig::new(1.0, 5.0, 64, 1e-5).unwrap();
        let m = wave_laguerre_march(&g, 0.5, &f, &cfg, &TestbedSettings::default()).unwrap();
        assert!(m.spectrum.iter().all(|v| v.norm() == 0.0));
        assert_eq!(m.terms, 5);
    }

    #[test]
    fn center_source_field_is_reflection_symmetric() {
        let g = ScalarGrid::homogeneous(10, 10, 1.0, 1.0).unwrap();
        let f = g.point_source([5.0, 5.0]);
        let u = helmholtz_direct(&g, 0.8, 1e-2, &f).unwrap();
        let w = g.nx - 1;
        for j in 0..w {
            for i in 0..w {
                let a = u[j * w + i];
                let b = u[i * w + j];
                assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-300));
            }
        }
    }

    #[test]
    fn line_grid_shape() {
        let g = ScalarGrid::homogeneous(5, 0, 0.5, 2.0).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.coords(0), [0.5, 0.0]);
        let l = g.laplacian().to_dense();
        assert_eq!(l[1], vec![-4.0, 8.0, -4.0, 0.0]);
    }
}
