use crate::assembly::{assemble_preconditioner, AssembledOperators, DampingSign, Material, MediumModel};
use crate::error::{Error, Result};
use crate::krylov::FgmresSettings;
use crate::laguerre::LaguerreConfig;
use crate::mesh::{Circle, EdgeMesh, Inclusion, OuterBoundary, RegionShape, ScenarioGeometry};
use crate::preconditioner::LaguerreSettings;
use crate::scalar::C64;
use crate::testbed::{ScalarGrid, TestbedSettings};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

/// Material layout of the slot scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// One material everywhere.
    #[default]
    Homogeneous,
    /// A slab of the second material along the bottom edge.
    Layered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Unpreconditioned,
    Laguerre,
    #[default]
    Both,
    ScalarTestbed,
}

/// Outer solver run for one sweep entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    Unpreconditioned,
    Laguerre,
}

impl SolveMode {
    pub fn label(self) -> &'static str {
        match self {
            SolveMode::Unpreconditioned => "unpreconditioned",
            SolveMode::Laguerre => "laguerre",
        }
    }
}

impl Mode {
    pub fn solves(self) -> &'static [SolveMode] {
        match self {
            Mode::Unpreconditioned => &[SolveMode::Unpreconditioned],
            Mode::Laguerre => &[SolveMode::Laguerre],
            Mode::Both => &[SolveMode::Unpreconditioned, SolveMode::Laguerre],
            Mode::ScalarTestbed => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DomainConfig {
    pub width: f64,
    pub height: f64,
    pub cells_x: usize,
    pub cells_y: usize,
    pub outer: OuterBoundary,
    /// Conductor radius as a fraction of the shorter side.
    pub radius_fraction: f64,
    /// Direction the slot faces, radians.
    pub slot_direction: f64,
    /// Height of the bottom slab in the layered model, as a fraction.
    pub layer_fraction: f64,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self {
            width: 20.0,
            height: 20.0,
            cells_x: 128,
            cells_y: 128,
            outer: OuterBoundary::Impedance,
            radius_fraction: 0.25,
            slot_direction: 0.0,
            layer_fraction: 0.35,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MediumConfig {
    /// Background material (region 0).
    pub background: Material,
    /// Slab material in the layered model (region 1).
    pub layer: Material,
    /// Impedance coefficient; defaults to `sqrt(eps/mu)` of the background,
    /// which absorbs normally incident waves.
    pub lambda: Option<f64>,
    pub damping: DampingSign,
}

impl Default for MediumConfig {
    fn default() -> Self {
        Self {
            background: Material::lossless(30.0, 1.0),
            layer: Material::lossless(5.0, 1.0),
            lambda: None,
            damping: DampingSign::Physical,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LaguerreSection {
    pub eta: f64,
    /// Source window length; defaults to two periods.
    pub window: Option<f64>,
    pub m_max: usize,
    pub eps_lag: f64,
    pub march: LaguerreSettings,
}

impl Default for LaguerreSection {
    fn default() -> Self {
        Self { eta: 75.0, window: None, m_max: 512, eps_lag: 1e-5, march: LaguerreSettings::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TestbedConfig {
    pub cells: usize,
    pub spacing: f64,
    pub speed: f64,
    /// Defaults to `2ω`.
    pub eta: Option<f64>,
    /// Window lengths to compare; empty means the Laguerre window.
    pub windows: Vec<f64>,
    /// Series length per unit of `ητ`.
    pub terms_per_unit: f64,
    pub eps_lag: f64,
    pub settings: TestbedSettings,
}

impl Default for TestbedConfig {
    fn default() -> Self {
        Self {
            cells: 64,
            spacing: 10.0,
            speed: 1.0,
            eta: None,
            windows: Vec::new(),
            terms_per_unit: 80.0,
            eps_lag: 1e-8,
            settings: TestbedSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub model: Model,
    pub mode: Mode,
    pub omega: f64,
    /// Slot angles in units of π.
    pub alpha_over_pi: Vec<f64>,
    /// Defaults to the domain center.
    pub source: Option<[f64; 2]>,
    pub output_dir: PathBuf,
    pub domain: DomainConfig,
    pub medium: MediumConfig,
    pub laguerre: LaguerreSection,
    pub solver: FgmresSettings,
    pub testbed: TestbedConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            model: Model::Homogeneous,
            mode: Mode::Both,
            omega: 2.0 * PI / 100.0,
            alpha_over_pi: vec![2.0, 1.0, 0.5, 0.1, 0.05, 0.0],
            source: None,
            output_dir: PathBuf::from("out"),
            domain: DomainConfig::default(),
            medium: MediumConfig::default(),
            laguerre: LaguerreSection::default(),
            solver: FgmresSettings { restart: 100, tol: 1e-8, max_iterations: 1000 },
            testbed: TestbedConfig::default(),
        }
    }
}

/// Everything needed to solve one sweep entry.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub alpha_over_pi: f64,
    pub mesh: EdgeMesh,
    pub medium: MediumModel,
    pub laguerre: LaguerreConfig,
    pub ops: AssembledOperators,
    pub rhs: Vec<C64>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return bad(format!("omega must be positive, got {}", self.omega));
        }
        if self.alpha_over_pi.is_empty() && self.mode != Mode::ScalarTestbed {
            return bad("alpha_over_pi is empty".into());
        }
        if let Some(a) = self.alpha_over_pi.iter().find(|a| !(0.0..=2.0).contains(*a)) {
            return bad(format!("slot angle {a}π outside [0, 2π]"));
        }
        let d = &self.domain;
        if d.cells_x == 0 || d.cells_y == 0 || !(d.width > 0.0) || !(d.height > 0.0) {
            return bad("domain needs positive extents and cell counts".into());
        }
        if !(0.0..=1.0).contains(&d.layer_fraction) {
            return bad(format!("layer_fraction {} outside [0, 1]", d.layer_fraction));
        }
        if !(d.radius_fraction > 0.0 && d.radius_fraction < 0.5) {
            return bad(format!("radius_fraction {} outside (0, 0.5)", d.radius_fraction));
        }
        if let Some(l) = self.medium.lambda {
            if !(l >= 0.0) {
                return bad(format!("lambda must be nonnegative, got {l}"));
            }
        }
        self.laguerre_config().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn window(&self) -> f64 {
        self.laguerre.window.unwrap_or(4.0 * PI / self.omega)
    }

    pub fn laguerre_config(&self) -> Result<LaguerreConfig> {
        let l = &self.laguerre;
        LaguerreConfig::new(l.eta, self.window(), l.m_max, l.eps_lag)
    }

    pub fn lambda(&self) -> f64 {
        let bg = &self.medium.background;
        self.medium.lambda.unwrap_or_else(|| (bg.eps / bg.mu).sqrt())
    }

    pub fn medium_model(&self) -> MediumModel {
        let mut regions = vec![self.medium.background];
        if self.model == Model::Layered {
            regions.push(self.medium.layer);
        }
        MediumModel { regions, lambda: self.lambda(), omega: self.omega, damping: self.medium.damping }
    }

    pub fn geometry(&self, alpha_over_pi: f64) -> ScenarioGeometry {
        let d = &self.domain;
        let mut g = ScenarioGeometry::plain(d.width, d.height);
        g.outer = d.outer;
        g.slot_direction = d.slot_direction;
        if alpha_over_pi < 2.0 {
            g.pec_circle = Some(Circle {
                center: [0.5 * d.width, 0.5 * d.height],
                radius: d.radius_fraction * d.width.min(d.height),
            });
            g.alpha = alpha_over_pi * PI;
        }
        if self.model == Model::Layered {
            g.inclusions.push(Inclusion {
                shape: RegionShape::Rect { min: [0.0, 0.0], max: [d.width, d.layer_fraction * d.height] },
                region: 1,
            });
        }
        g
    }

    pub fn source_point(&self) -> [f64; 2] {
        self.source.unwrap_or([0.5 * self.domain.width, 0.5 * self.domain.height])
    }

    /// Same scenario on an `n × n` grid.
    pub fn with_grid(&self, n: usize) -> Self {
        let mut c = self.clone();
        c.domain.cells_x = n;
        c.domain.cells_y = n;
        c
    }

    pub fn scenario(&self, alpha_over_pi: f64) -> Result<Scenario> {
        let mesh = EdgeMesh::new(self.domain.cells_x, self.domain.cells_y, self.geometry(alpha_over_pi))?;
        let medium = self.medium_model();
        let laguerre = self.laguerre_config()?;
        let ops = assemble_preconditioner(&mesh, &medium, &laguerre)?;
        let edge = mesh.locate_source_dof(self.source_point());
        let dof = mesh
            .dof_of(edge)
            .ok_or_else(|| Error::Geometry(format!("source edge {edge} lies on a conductor")))?;
        let mut rhs = vec![C64::new(0.0, 0.0); mesh.n_dofs()];
        rhs[dof] = C64::new(1.0, 0.0);
        Ok(Scenario { alpha_over_pi, mesh, medium, laguerre, ops, rhs })
    }

    /// Grid, center source and per-window Laguerre configurations.
    pub fn testbed_setup(&self) -> Result<(ScalarGrid, [f64; 2], Vec<LaguerreConfig>)> {
        let t = &self.testbed;
        let grid = ScalarGrid::homogeneous(t.cells, t.cells, t.spacing, t.speed)?;
        let c = 0.5 * t.cells as f64 * t.spacing;
        let eta = t.eta.unwrap_or(2.0 * self.omega);
        let windows = if t.windows.is_empty() { vec![self.window()] } else { t.windows.clone() };
        let configs = windows
            .iter()
            .map(|&tau| {
                let m = (t.terms_per_unit * eta * tau).ceil().max(1.0) as usize;
                LaguerreConfig::new(eta, tau, m, t.eps_lag)
            })
            .collect::<Result<_>>()?;
        Ok((grid, [c, c], configs))
    }
}
