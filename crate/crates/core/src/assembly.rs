//! Closed-form rectangle integrals for the curl-curl, mass and boundary
//! terms, and the two systems built from them: the complex harmonic system
//! `A = K - ω²M_ε + i·s·ω·(M_σ + M_Γ)` and the real Laguerre-shifted system
//! `B = K + (η²/4)M_ε + s·(η/2)(M_σ + M_Γ)`.
//!
//! `s` is the sign of the first-order time term; see [`DampingSign`].

use crate::error::{Error, Result};
use crate::laguerre::LaguerreConfig;
use crate::mesh::{EdgeMesh, EdgeTag, CELL_SIGNS};
use crate::scalar::C64;
use crate::sparse::CsrMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub mu: f64,
    pub eps: f64,
    #[serde(default)]
    pub sigma: f64,
}

impl Material {
    pub fn lossless(mu: f64, eps: f64) -> Self {
        Self { mu, eps, sigma: 0.0 }
    }
}

/// Sign of the first-order time-derivative (conduction and impedance) terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingSign {
    /// `+∂t`: losses damp the field, and the Laguerre system is definite for every η.
    #[default]
    Physical,
    /// `-∂t`: definite only while `η > 2σ/ε` in every region.
    AsPrinted,
}

impl DampingSign {
    pub fn sign(self) -> f64 {
        match self {
            DampingSign::Physical => 1.0,
            DampingSign::AsPrinted => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediumModel {
    /// Indexed by mesh region id.
    pub regions: Vec<Material>,
    /// Impedance coefficient on the outer boundary.
    pub lambda: f64,
    pub omega: f64,
    #[serde(default)]
    pub damping: DampingSign,
}

impl MediumModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {}", self.omega)));
        }
        if !self.lambda.is_finite() {
            return Err(Error::InvalidParameter("lambda must be finite".into()));
        }
        for (region, m) in self.regions.iter().enumerate() {
            if !(m.mu > 0.0) {
                return Err(Error::Medium { region, reason: format!("mu must be positive, got {}", m.mu) });
            }
            if !(m.eps > 0.0) {
                return Err(Error::Medium { region, reason: format!("eps must be positive, got {}", m.eps) });
            }
            if !(m.sigma >= 0.0) {
                return Err(Error::Medium { region, reason: format!("sigma must be nonnegative, got {}", m.sigma) });
            }
        }
        Ok(())
    }

    pub fn material(&self, region: usize) -> Result<&Material> {
        self.regions
            .get(region)
            .ok_or_else(|| Error::Medium { region, reason: "no material defined".into() })
    }

    /// Complex relative permittivity `ε - i·s·σ/ω`.
    pub fn eps_r(&self, region: usize) -> Result<C64> {
        let m = self.material(region)?;
        Ok(C64::new(m.eps, -self.damping.sign() * m.sigma / self.omega))
    }

    /// Wavenumber `ω·sqrt(ε_r μ_r)`.
    pub fn kappa(&self, region: usize) -> Result<C64> {
        let m = self.material(region)?;
        Ok((self.eps_r(region)? * m.mu).sqrt() * self.omega)
    }

    /// Laguerre mass shift `μ(εη²/4 + s·ση/2)` of one region.
    pub fn beta1(&self, region: usize, eta: f64) -> Result<f64> {
        let m = self.material(region)?;
        Ok(m.mu * (m.eps * eta * eta / 4.0 + self.damping.sign() * m.sigma * eta / 2.0))
    }

    /// Boundary shift `(η/2)λ sqrt(μ ε)` of one region.
    pub fn beta2(&self, region: usize, eta: f64) -> Result<f64> {
        let m = self.material(region)?;
        Ok(0.5 * eta * self.lambda * (m.mu * m.eps).sqrt())
    }
}

/// The four real operators, all on one sparsity pattern over the free edges.
#[derive(Debug, Clone)]
pub struct SystemParts {
    /// `(μ⁻¹ curl u, curl v)`.
    pub k: CsrMatrix<f64>,
    /// `(μ ε u, v)`.
    pub m_eps: CsrMatrix<f64>,
    /// `(μ σ u, v)`.
    pub m_sigma: CsrMatrix<f64>,
    /// `λ sqrt(μ ε) <u_T, v_T>` on the outer boundary.
    pub m_gamma: CsrMatrix<f64>,
}

impl SystemParts {
    /// `s·(M_σ + M_Γ)`, the coefficient of the first time derivative.
    pub fn damping(&self, sign: DampingSign) -> CsrMatrix<f64> {
        let s = sign.sign();
        self.m_sigma.zip_map(&self.m_gamma, |a, b| s * (a + b)).expect("shared pattern")
    }

    pub fn harmonic(&self, omega: f64, sign: DampingSign) -> CsrMatrix<C64> {
        let d = self.damping(sign);
        let kr = self.k.zip_map(&self.m_eps, |k, m| k - omega * omega * m).expect("shared pattern");
        kr.zip_map(&d, |re, im| C64::new(re, omega * im)).expect("shared pattern")
    }

    pub fn laguerre_shifted(&self, eta: f64, sign: DampingSign) -> CsrMatrix<f64> {
        let d = self.damping(sign);
        let kr = self.k.zip_map(&self.m_eps, |k, m| k + 0.25 * eta * eta * m).expect("shared pattern");
        kr.zip_map(&d, |a, b| a + 0.5 * eta * b).expect("shared pattern")
    }
}

/// Curl-curl matrix of one `hx × hy` cell, local order bottom, right, top, left.
pub fn element_curl_curl(hx: f64, hy: f64, mu: f64) -> [[f64; 4]; 4] {
    let mut k = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            k[a][b] = CELL_SIGNS[a] * CELL_SIGNS[b] / (mu * hx * hy);
        }
    }
    k
}

/// Unit-weight mass matrix of one cell, same local order. Basis functions
/// carry the global edge orientation, so no signs appear.
pub fn element_mass(hx: f64, hy: f64) -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            m[a][b] = match (a % 2, b % 2) {
                (0, 0) => hy / hx * if a == b { 1.0 / 3.0 } else { 1.0 / 6.0 },
                (1, 1) => hx / hy * if a == b { 1.0 / 3.0 } else { 1.0 / 6.0 },
                _ => 0.0,
            };
        }
    }
    m
}

pub fn assemble_parts(mesh: &EdgeMesh, medium: &MediumModel) -> Result<SystemParts> {
    medium.validate()?;
    let mass = element_mass(mesh.hx, mesh.hy);
    let mut pos: Vec<(usize, usize)> = Vec::with_capacity(16 * mesh.n_cells());
    let mut vals: Vec<[f64; 4]> = Vec::with_capacity(16 * mesh.n_cells());
    for j in 0..mesh.ny {
        for i in 0..mesh.nx {
            let mat = medium.material(mesh.cell_region(i, j))?;
            let edges = mesh.cell_edges(i, j);
            let dofs = edges.map(|e| mesh.dof_of(e));
            let (me, ms) = (mat.mu * mat.eps, mat.mu * mat.sigma);
            let curl = element_curl_curl(mesh.hx, mesh.hy, mat.mu);
            for a in 0..4 {
                let Some(ra) = dofs[a] else { continue };
                for b in 0..4 {
                    let Some(rb) = dofs[b] else { continue };
                    pos.push((ra, rb));
                    vals.push([curl[a][b], me * mass[a][b], ms * mass[a][b], 0.0]);
                }
            }
        }
    }
    for e in 0..mesh.n_edges() {
        if mesh.tag(e) != EdgeTag::Gamma {
            continue;
        }
        let Some(r) = mesh.dof_of(e) else { continue };
        let mat = medium.material(mesh.boundary_cell_region(e))?;
        let w = medium.lambda * (mat.mu * mat.eps).sqrt() / mesh.edge_length(e);
        pos.push((r, r));
        vals.push([0.0, 0.0, 0.0, w]);
    }
    let n = mesh.n_dofs();
    let build = |c: usize| {
        let t: Vec<(usize, usize, f64)> = pos.iter().zip(&vals).map(|(&(r, col), v)| (r, col, v[c])).collect();
        CsrMatrix::from_triplets(n, n, &t)
    };
    Ok(SystemParts { k: build(0)?, m_eps: build(1)?, m_sigma: build(2)?, m_gamma: build(3)? })
}

pub fn assemble_harmonic(mesh: &EdgeMesh, medium: &MediumModel) -> Result<CsrMatrix<C64>> {
    Ok(assemble_parts(mesh, medium)?.harmonic(medium.omega, medium.damping))
}

/// Everything the preconditioner and the outer solver need for one scenario.
#[derive(Debug, Clone)]
pub struct AssembledOperators {
    pub a: CsrMatrix<C64>,
    pub b: CsrMatrix<f64>,
    pub parts: SystemParts,
    /// `s·(M_σ + M_Γ)`.
    pub damping: CsrMatrix<f64>,
    /// Per region.
    pub beta1: Vec<f64>,
    /// Per region.
    pub beta2: Vec<f64>,
    pub eta: f64,
    pub omega: f64,
}

pub fn assemble_preconditioner(mesh: &EdgeMesh, medium: &MediumModel, config: &LaguerreConfig) -> Result<AssembledOperators> {
    config.validate()?;
    medium.validate()?;
    let eta = config.eta;
    let mut used = vec![false; medium.regions.len()];
    for &r in mesh.regions() {
        medium.material(r)?;
        used[r] = true;
    }
    let mut beta1 = Vec::with_capacity(medium.regions.len());
    let mut beta2 = Vec::with_capacity(medium.regions.len());
    for region in 0..medium.regions.len() {
        let b1 = medium.beta1(region, eta)?;
        if used[region] && !(b1 > 0.0) {
            let m = medium.material(region)?;
            return Err(Error::Medium {
                region,
                reason: format!(
                    "Laguerre mass shift {b1:e} is not positive (need eta > 2 sigma / eps = {})",
                    2.0 * m.sigma / m.eps
                ),
            });
        }
        beta1.push(b1);
        beta2.push(medium.beta2(region, eta)?);
    }
    let parts = assemble_parts(mesh, medium)?;
    Ok(AssembledOperators {
        a: parts.harmonic(medium.omega, medium.damping),
        b: parts.laguerre_shifted(eta, medium.damping),
        damping: parts.damping(medium.damping),
        parts,
        beta1,
        beta2,
        eta,
        omega: medium.omega,
    })
}
