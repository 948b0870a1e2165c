//! wasm-bindgen entry points for `www/index.html`. Every call returns a JSON
//! string, or throws a string describing the error.

use lagmax::experiments::{Model, ScenarioConfig, SolveMode};
use lagmax::laguerre::{fill_laguerre_functions, window_source_coeffs, LaguerreConfig};
use lagmax::testbed::limiting_amplitude_check;
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

fn msg(e: lagmax::Error) -> String {
    e.to_string()
}

fn throw(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[derive(Serialize)]
struct Curves {
    times: Vec<f64>,
    /// `curves[m][k] = l_m(eta * times[k])`
    curves: Vec<Vec<f64>>,
    /// `|c_m|` of the windowed harmonic.
    window_coeffs: Vec<f64>,
}

/// Laguerre functions `l_m(eta t)` for `m < count` on `[0, t_max]`, plus
/// the coefficient magnitudes of a two-period window at `omega`.
#[wasm_bindgen]
pub fn laguerre_curves(eta: f64, count: usize, t_max: f64, samples: usize, omega: f64) -> Result<String, JsValue> {
    throw(curves_json(eta, count, t_max, samples, omega))
}

pub fn curves_json(eta: f64, count: usize, t_max: f64, samples: usize, omega: f64) -> Result<String, String> {
    if count == 0 || samples < 2 || !(t_max > 0.0) {
        return Err(String::from("need count >= 1, samples >= 2 and t_max > 0"));
    }
    let times: Vec<f64> = (0..samples).map(|k| t_max * k as f64 / (samples - 1) as f64).collect();
    let mut curves = vec![Vec::with_capacity(samples); count];
    let mut l = vec![0.0; count];
    for t in &times {
        fill_laguerre_functions(eta * t, &mut l);
        for (c, v) in curves.iter_mut().zip(&l) {
            c.push(*v);
        }
    }
    let cfg = LaguerreConfig::new(eta, 4.0 * std::f64::consts::PI / omega, count, 1e-5).map_err(msg)?;
    let window_coeffs = window_source_coeffs(omega, &cfg, count).map_err(msg)?.iter().map(|c| c.norm()).collect();
    to_json(&Curves { times, curves, window_coeffs })
}

#[derive(Serialize)]
struct Solve {
    dofs: usize,
    converged: bool,
    iterations: usize,
    residuals: Vec<f64>,
    series_terms: Option<usize>,
    width: usize,
    height: usize,
    /// Cell `|E|`, row 0 at the bottom.
    field: Vec<f64>,
}

/// One slotted-circle solve on a `cells × cells` grid.
#[wasm_bindgen]
pub fn solve_scenario(
    layered: bool,
    alpha_over_pi: f64,
    cells: usize,
    preconditioned: bool,
    eta: f64,
    m_max: usize,
) -> Result<String, JsValue> {
    throw(solve_json(layered, alpha_over_pi, cells, preconditioned, eta, m_max))
}

pub fn solve_json(
    layered: bool,
    alpha_over_pi: f64,
    cells: usize,
    preconditioned: bool,
    eta: f64,
    m_max: usize,
) -> Result<String, String> {
    if !(4..=64).contains(&cells) {
        return Err(String::from("cells must lie in 4..=64"));
    }
    let mut cfg = ScenarioConfig::default().with_grid(cells);
    cfg.model = if layered { Model::Layered } else { Model::Homogeneous };
    cfg.alpha_over_pi = vec![alpha_over_pi];
    cfg.laguerre.eta = eta;
    cfg.laguerre.m_max = m_max;
    cfg.validate().map_err(msg)?;
    let s = cfg.scenario(alpha_over_pi).map_err(msg)?;
    let mode = if preconditioned { SolveMode::Laguerre } else { SolveMode::Unpreconditioned };
    let out = s.solve(mode, &cfg.solver, &cfg).map_err(msg)?;
    let field = s.mesh.cell_field_magnitude(&s.mesh.expand(&out.solution));
    to_json(&Solve {
        dofs: s.mesh.n_dofs(),
        converged: out.report.converged,
        iterations: out.report.iterations,
        residuals: out.report.residual_history.clone(),
        series_terms: out.series_terms(),
        width: s.mesh.nx,
        height: s.mesh.ny,
        field,
    })
}

#[derive(Serialize)]
struct Testbed {
    relative_error: f64,
    terms: usize,
    cells: usize,
    /// Node-major `|u|` of the direct and the marched amplitude.
    direct: Vec<f64>,
    march: Vec<f64>,
}

/// Scalar limiting-amplitude check on a `cells × cells` grid for window `tau`.
#[wasm_bindgen]
pub fn scalar_testbed(cells: usize, tau: f64) -> Result<String, JsValue> {
    throw(testbed_json(cells, tau))
}

pub fn testbed_json(cells: usize, tau: f64) -> Result<String, String> {
    if !(4..=64).contains(&cells) {
        return Err(String::from("cells must lie in 4..=64"));
    }
    let mut cfg = ScenarioConfig::default();
    cfg.testbed.cells = cells;
    cfg.testbed.windows = vec![tau];
    let (grid, source, configs) = cfg.testbed_setup().map_err(msg)?;
    let f = grid.point_source(source);
    let r = limiting_amplitude_check(&grid, cfg.omega, &f, &configs[0], &cfg.testbed.settings, source).map_err(msg)?;
    to_json(&Testbed {
        relative_error: r.relative_error,
        terms: r.march.terms,
        cells: grid.nx - 1,
        direct: r.direct.iter().map(|v| v.norm()).collect(),
        march: r.march.amplitude().iter().map(|v| v.norm()).collect(),
    })
}
