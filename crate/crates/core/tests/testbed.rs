use lagmax::krylov::{lanczos_extremes, PcgSettings};
use lagmax::laguerre::{window_source_coeffs, LaguerreConfig};
use lagmax::scalar::norm2;
use lagmax::sparse::CsrMatrix;
use lagmax::testbed::*;
use lagmax::C64;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

#[test]
fn line_green_function() {
    let (omega, delta, h) = (0.1, 1e-2, 1.0);
    // 20002 cells leave 20001 interior nodes with the middle one centered
    let grid = ScalarGrid::homogeneous(20002, 0, h, 1.0).unwrap();
    let n = grid.n();
    let src = grid.coords(n / 2);
    let f = grid.point_source(src);
    let u = helmholtz_direct(&grid, omega, delta, &f).unwrap();
    let kappa = C64::new(1.0, -delta).sqrt() * omega;
    let mut worst: f64 = 0.0;
    for j in 0..=100 {
        let k = n / 2 + j;
        let g = (C64::new(0.0, -1.0) * kappa * (j as f64 * h)).exp() / (C64::new(0.0, 2.0) * kappa);
        worst = worst.max((u[k] - g).norm() / g.norm());
        // symmetric about the source
        assert!((u[k] - u[n / 2 - j]).norm() <= 1e-10 * g.norm());
    }
    assert!(worst < 1e-2, "worst relative deviation {worst}");
}

struct Pulse {
    grid: ScalarGrid,
    omega: f64,
    source: [f64; 2],
    f: Vec<f64>,
    config: LaguerreConfig,
    settings: TestbedSettings,
}

/// A 24 × 24 grid with h = 0.5 driven by a Gaussian `exp(-r²)` at
/// `source`, recording the nodes nearest `nodes`. The smooth profile keeps
/// the response inside the band both methods resolve.
fn pulse(source: [f64; 2], nodes: &[[f64; 2]]) -> Pulse {
    let grid = ScalarGrid::homogeneous(24, 24, 0.5, 1.0).unwrap();
    let omega = 0.5;
    let f: Vec<f64> = (0..grid.n())
        .map(|k| {
            let c = grid.coords(k);
            (-((c[0] - source[0]).powi(2) + (c[1] - source[1]).powi(2))).exp()
        })
        .collect();
    let tau = 4.0 * std::f64::consts::PI / omega;
    let eta = 2.0 * omega;
    let m = (80.0 * eta * tau).ceil() as usize;
    let config = LaguerreConfig::new(eta, tau, m, 1e-8).unwrap();
    let settings = TestbedSettings {
        inner: PcgSettings { tol: 1e-12, max_iterations: 2000 },
        fixed_terms: Some(m),
        record_nodes: nodes.iter().map(|p| grid.nearest(*p)).collect(),
        // free ringing after the window must die out within the time span
        // the series resolves at the grid's higher frequencies
        delta: 0.1,
        ..TestbedSettings::default()
    };
    Pulse { grid, omega, source, f, config, settings }
}

/// Explicit leapfrog for `W(u'' + γu') + Lu = f exp(iωt)` on `[0, t_end]`,
/// sampled every `every` steps at `nodes`.
fn leapfrog(p: &Pulse, dt: f64, t_end: f64, every: usize, nodes: &[usize]) -> Vec<(f64, Vec<C64>)> {
    let l = p.grid.laplacian();
    let w_inv: Vec<f64> = p.grid.speed.iter().map(|v| v * v).collect();
    let gamma = p.settings.delta * p.omega;
    let n = p.grid.n();
    let accel = |u: &[C64], t: f64| -> Vec<C64> {
        let mut lu = vec![zero(); n];
        l.mul_complex_into(u, &mut lu);
        let s = C64::from_polar(1.0, p.omega * t);
        (0..n).map(|i| (s * p.f[i] - lu[i]) * w_inv[i]).collect()
    };
    let mut prev = vec![zero(); n];
    let a0 = accel(&prev, 0.0);
    let mut cur: Vec<C64> = a0.iter().map(|a| a * (0.5 * dt * dt)).collect();
    let steps = (t_end / dt).round() as usize;
    let mut out = vec![(0.0, vec![zero(); nodes.len()])];
    let (lo, hi) = (1.0 - 0.5 * gamma * dt, 1.0 + 0.5 * gamma * dt);
    for s in 1..=steps {
        let t = s as f64 * dt;
        if s % every == 0 {
            out.push((t, nodes.iter().map(|k| cur[*k]).collect()));
        }
        let a = accel(&cur, t);
        let next: Vec<C64> = (0..n).map(|i| (cur[i] * 2.0 - prev[i] * lo + a[i] * (dt * dt)) / hi).collect();
        prev = std::mem::replace(&mut cur, next);
    }
    out
}

#[test]
fn resummed_traces_match_time_stepping() {
    let p = pulse([6.0, 6.0], &[[6.0, 6.0], [6.0, 8.0], [6.0, 11.0]]);
    let march = wave_laguerre_march(&p.grid, p.omega, &p.f, &p.config, &p.settings).unwrap();
    let samples = leapfrog(&p, 2.5e-3, 2.0 * p.config.tau, 40, &p.settings.record_nodes);
    for (j, trace) in march.traces.iter().enumerate() {
        let reference: f64 = samples.iter().map(|(_, v)| v[j].norm_sqr()).sum();
        let error: f64 = samples.iter().map(|(t, v)| (trace.evaluate(*t).unwrap() - v[j]).norm_sqr()).sum();
        let rel = (error / reference).sqrt();
        assert!(rel < 1e-3, "node {j}: relative error {rel:e}");
    }
}

#[test]
fn nothing_arrives_before_the_wavefront() {
    let p = pulse([2.0, 6.0], &[[11.0, 6.0]]);
    let march = wave_laguerre_march(&p.grid, p.omega, &p.f, &p.config, &p.settings).unwrap();
    let node = p.settings.record_nodes[0];
    let c = p.grid.coords(node);
    // the source is below 1e-8 of its peak beyond this radius
    let support = (8.0 * 10f64.ln()).sqrt();
    let arrival = (c[0] - p.source[0]).hypot(c[1] - p.source[1]) - support;
    let steps = 2000;
    let values: Vec<(f64, f64)> = (0..=steps)
        .map(|k| 2.0 * p.config.tau * k as f64 / steps as f64)
        .map(|t| (t, march.traces[0].evaluate(t).unwrap().norm()))
        .collect();
    let peak = values.iter().map(|v| v.1).fold(0.0, f64::max);
    let early = values.iter().filter(|(t, _)| *t < arrival).map(|v| v.1).fold(0.0, f64::max);
    assert!(arrival > 4.0);
    assert!(early < 1e-3 * peak, "{early:e} before t = {arrival} against peak {peak:e}");
}

#[test]
fn march_coefficients_satisfy_the_recurrence() {
    let grid = ScalarGrid::homogeneous(10, 8, 1.0, 1.3).unwrap();
    let omega = 0.4;
    let f = grid.point_source([4.0, 3.0]);
    let config = LaguerreConfig::new(0.8, 30.0, 200, 1e-8).unwrap();
    let settings = TestbedSettings {
        inner: PcgSettings { tol: 1e-13, max_iterations: 1000 },
        fixed_terms: Some(40),
        keep_all: true,
        ..TestbedSettings::default()
    };
    let march = wave_laguerre_march(&grid, omega, &f, &config, &settings).unwrap();
    let eta = config.eta;
    let gamma = settings.delta * omega;
    let w = grid.weight();
    let l = grid.laplacian();
    let c = window_source_coeffs(omega, &config, 40).unwrap();
    let mul = |a: &CsrMatrix<f64>, x: &[C64]| {
        let mut y = vec![zero(); x.len()];
        a.mul_complex_into(x, &mut y);
        y
    };
    for m in 0..march.coeffs.len() {
        let u = &march.coeffs[m];
        let lu = mul(&l, u);
        let wu = mul(&w, u);
        let mut lhs: Vec<C64> = lu.iter().zip(&wu).map(|(a, b)| a + b * (0.25 * eta * eta + 0.5 * gamma * eta)).collect();
        for k in 0..m {
            let wk = mul(&w, &march.coeffs[k]);
            let s = eta * eta * (m - k) as f64 + gamma * eta;
            lhs.iter_mut().zip(&wk).for_each(|(a, b)| *a += b * s);
        }
        let res: Vec<C64> = lhs.iter().zip(&f).map(|(a, fv)| a - c[m] * fv).collect();
        let scale = norm2(&lu).max(c[m].norm() * norm2(&f));
        assert!(norm2(&res) <= 1e-10 * scale, "m = {m}");
    }
}

#[test]
fn inner_operator_is_positive_definite() {
    for (eta, delta) in [(0.126, 1e-2), (1.0, 0.0), (75.0, 0.1)] {
        let grid = ScalarGrid::homogeneous(32, 32, 10.0, 1.0).unwrap();
        let gamma = delta * 2.0 * std::f64::consts::PI / 100.0;
        let shift = 0.25 * eta * eta + 0.5 * gamma * eta;
        let l = grid.laplacian();
        let mut t = Vec::new();
        for i in 0..l.nrows() {
            let (cols, vals) = l.row(i);
            for (c, v) in cols.iter().zip(vals) {
                t.push((i, *c, *v));
            }
            t.push((i, i, shift));
        }
        let b = CsrMatrix::from_triplets(l.nrows(), l.ncols(), &t).unwrap();
        let start: Vec<f64> = (0..b.nrows()).map(|i| 1.0 + (i % 3) as f64).collect();
        let (lo, _) = lanczos_extremes(&b, &start, 80).unwrap();
        assert!(lo > 0.0, "eta {eta}: smallest Ritz value {lo}");
    }
}

#[test]
fn zero_source_has_zero_error() {
    let grid = ScalarGrid::homogeneous(8, 8, 10.0, 1.0).unwrap();
    let config = LaguerreConfig::new(0.1, 200.0, 500, 1e-8).unwrap();
    let f = vec![0.0; grid.n()];
    let r = limiting_amplitude_check(&grid, 0.06, &f, &config, &TestbedSettings::default(), [40.0, 40.0]).unwrap();
    assert_eq!(r.relative_error, 0.0);
    assert!(r.march.amplitude().iter().all(|v| *v == zero()));
}

#[test]
fn field_csv_parses_back() {
    let grid = ScalarGrid::homogeneous(3, 2, 0.5, 1.0).unwrap();
    let field: Vec<C64> = (0..grid.n()).map(|k| C64::new(k as f64, -(k as f64) / 3.0)).collect();
    let mut buf = Vec::new();
    write_field_csv(&grid, &field, &mut buf).unwrap();
    let rows = lagmax::artifacts::parse_field_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(rows.len(), grid.n());
    for (k, r) in rows.iter().enumerate() {
        assert_eq!([r.x, r.y], grid.coords(k));
        assert_eq!(C64::new(r.re, r.im), field[k]);
    }
    assert!(write_field_csv(&grid, &field[1..], &mut Vec::new()).is_err());
}
