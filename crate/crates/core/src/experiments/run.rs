use super::config::{Mode, Scenario, ScenarioConfig, SolveMode};
use crate::artifacts::GrayImage;
use crate::direct::solve_direct;
use crate::error::{Error, Result};
use crate::krylov::{fgmres, FgmresSettings, SolveReport};
use crate::preconditioner::{write_apply_stats, ApplyStats, LaguerrePreconditioner};
use crate::scalar::{relative_error, C64};
use crate::testbed::{limiting_amplitude_check, write_field_csv};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

/// Solution and diagnostics of one outer solve.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub solution: Vec<C64>,
    pub report: SolveReport,
    pub apply_stats: Vec<ApplyStats>,
}

impl SolveOutcome {
    /// Largest number of marched terms over all applications.
    pub fn series_terms(&self) -> Option<usize> {
        self.apply_stats.iter().map(|s| s.terms).max()
    }
}

impl Scenario {
    pub fn solve(&self, mode: SolveMode, settings: &FgmresSettings, config: &ScenarioConfig) -> Result<SolveOutcome> {
        match mode {
            SolveMode::Unpreconditioned => {
                let (solution, report) = fgmres(&self.ops.a, &self.rhs, None, settings)?;
                Ok(SolveOutcome { solution, report, apply_stats: Vec::new() })
            }
            SolveMode::Laguerre => {
                let mut p = LaguerrePreconditioner::new(&self.ops, self.laguerre, config.laguerre.march)?;
                let (solution, report) = fgmres(&self.ops.a, &self.rhs, Some(&mut p), settings)?;
                Ok(SolveOutcome { solution, report, apply_stats: p.stats().to_vec() })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub alpha_over_pi: f64,
    pub mode: SolveMode,
    pub dofs: usize,
    pub converged: bool,
    pub iterations: usize,
    pub final_residual: Option<f64>,
    /// First iteration at or below `1e-4`.
    pub iterations_to_1e4: Option<usize>,
    pub wall_time: f64,
    /// Marched terms `M*` (Laguerre mode).
    pub series_terms: Option<usize>,
    pub residual_file: Option<String>,
    pub stats_file: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestbedEntry {
    pub window: f64,
    pub m_max: usize,
    pub terms: usize,
    pub relative_error: f64,
    pub wall_time: f64,
    pub field_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config: ScenarioConfig,
    pub entries: Vec<SweepEntry>,
    pub testbed: Vec<TestbedEntry>,
    pub field_files: Vec<String>,
    pub wall_time: f64,
}

impl RunManifest {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// File-name form of a slot angle, e.g. `0.05pi`.
pub fn alpha_label(alpha_over_pi: f64) -> String {
    format!("{alpha_over_pi}pi")
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Runs the configured sweep (or the scalar testbed) and writes all
/// artifacts plus `manifest.json` into the output directory. Solver
/// failures are recorded per entry; IO failures abort.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunManifest> {
    config.validate()?;
    let clock = std::time::Instant::now();
    let dir = config.output_dir.as_path();
    std::fs::create_dir_all(dir)?;
    let mut manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        entries: Vec::new(),
        testbed: Vec::new(),
        field_files: Vec::new(),
        wall_time: 0.0,
    };
    if config.mode == Mode::ScalarTestbed {
        manifest.testbed = run_testbed(config, dir)?;
    } else {
        for &alpha in &config.alpha_over_pi {
            run_alpha(config, alpha, dir, &mut manifest)?;
        }
    }
    manifest.wall_time = clock.elapsed().as_secs_f64();
    std::fs::write(dir.join("manifest.json"), manifest.to_json()?)?;
    Ok(manifest)
}

fn run_alpha(config: &ScenarioConfig, alpha: f64, dir: &Path, manifest: &mut RunManifest) -> Result<()> {
    let label = alpha_label(alpha);
    let failed = |mode, dofs, e: String| SweepEntry {
        alpha_over_pi: alpha,
        mode,
        dofs,
        converged: false,
        iterations: 0,
        final_residual: None,
        iterations_to_1e4: None,
        wall_time: 0.0,
        series_terms: None,
        residual_file: None,
        stats_file: None,
        error: Some(e),
    };
    let scenario = match config.scenario(alpha) {
        Ok(s) => s,
        Err(e) => {
            for &mode in config.mode.solves() {
                manifest.entries.push(failed(mode, 0, e.to_string()));
            }
            return Ok(());
        }
    };
    let dofs = scenario.mesh.n_dofs();
    let mut field = None;
    for &mode in config.mode.solves() {
        let out = match scenario.solve(mode, &config.solver, config) {
            Ok(o) => o,
            Err(e) => {
                manifest.entries.push(failed(mode, dofs, e.to_string()));
                continue;
            }
        };
        let residual_file = format!("residual_{}_{label}.csv", mode.label());
        out.report.write_csv(create(dir, &residual_file)?)?;
        let stats_file = if mode == SolveMode::Laguerre {
            let name = format!("laguerre_stats_{label}.csv");
            write_apply_stats(&out.apply_stats, create(dir, &name)?)?;
            Some(name)
        } else {
            None
        };
        manifest.entries.push(SweepEntry {
            alpha_over_pi: alpha,
            mode,
            dofs,
            converged: out.report.converged,
            iterations: out.report.iterations,
            final_residual: Some(out.report.final_residual()),
            iterations_to_1e4: out.report.iterations_to(1e-4),
            wall_time: out.report.wall_time,
            series_terms: out.series_terms(),
            residual_file: Some(residual_file),
            stats_file,
            error: None,
        });
        field = Some(out.solution);
    }
    if let Some(x) = field {
        let mesh = &scenario.mesh;
        let mag = mesh.cell_field_magnitude(&mesh.expand(&x));
        let name = format!("field_magnitude_{label}.pgm");
        GrayImage::from_field(mesh.nx, mesh.ny, &mag)?.write_pgm(create(dir, &name)?)?;
        manifest.field_files.push(name);
    }
    Ok(())
}

fn run_testbed(config: &ScenarioConfig, dir: &Path) -> Result<Vec<TestbedEntry>> {
    let (grid, source, configs) = config.testbed_setup()?;
    let f = grid.point_source(source);
    let mut out = Vec::new();
    for (k, cfg) in configs.iter().enumerate() {
        let clock = std::time::Instant::now();
        let r = limiting_amplitude_check(&grid, config.omega, &f, cfg, &config.testbed.settings, source)?;
        if k == 0 {
            write_field_csv(&grid, &r.direct, create(dir, "testbed_direct.csv")?)?;
        }
        let field_file = format!("testbed_laguerre_{}.csv", cfg.tau);
        write_field_csv(&grid, &r.march.amplitude(), create(dir, &field_file)?)?;
        out.push(TestbedEntry {
            window: cfg.tau,
            m_max: cfg.m_max,
            terms: r.march.terms,
            relative_error: r.relative_error,
            wall_time: clock.elapsed().as_secs_f64(),
            field_file,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleEntry {
    pub alpha_over_pi: f64,
    pub mode: SolveMode,
    pub dofs: usize,
    pub converged: bool,
    pub relative_error: f64,
}

/// Largest system the direct oracle accepts.
pub const ORACLE_MAX_DOFS: usize = 5000;

/// Solves every sweep entry on an `n × n` grid iteratively and by banded
/// LU, returning `|x_iter - x_direct| / |x_direct|` per entry.
pub fn compare_with_direct(config: &ScenarioConfig, n: usize) -> Result<Vec<OracleEntry>> {
    let small = config.with_grid(n);
    small.validate()?;
    let mut out = Vec::new();
    for &alpha in &small.alpha_over_pi {
        let s = small.scenario(alpha)?;
        let dofs = s.mesh.n_dofs();
        if dofs > ORACLE_MAX_DOFS {
            return Err(Error::InvalidParameter(format!("{dofs} unknowns exceed the oracle limit {ORACLE_MAX_DOFS}")));
        }
        let direct = solve_direct(&s.ops.a, &s.rhs)?;
        for &mode in small.mode.solves() {
            let o = s.solve(mode, &small.solver, &small)?;
            out.push(OracleEntry {
                alpha_over_pi: alpha,
                mode,
                dofs,
                converged: o.report.converged,
                relative_error: relative_error(&o.solution, &direct),
            });
        }
    }
    Ok(out)
}
