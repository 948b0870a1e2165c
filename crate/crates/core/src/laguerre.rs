//! Laguerre functions, their Fourier images, coefficient quadrature and the
//! running-sum algebra behind time derivatives in Laguerre coefficient space.
//!
//! Conventions used throughout the crate:
//!
//! * `l_m(s) = exp(-s/2) L_m(s)`; a causal signal is expanded as
//!   `f(t) ≈ eta * sum_m a_m l_m(eta t)` with `a_m = ∫_0^∞ f(t) l_m(eta t) dt`.
//! * [`phi_fourier`] returns `(eta/2π) (iω - eta/2)^m / (iω + eta/2)^(m+1)`,
//!   which is `(1/2π) ∫ φ_m(s) exp(-i ω s / eta) ds`, i.e. the transform
//!   taken with respect to the scaled time `s = eta t`.
//! * Time derivatives obey `coeff_m(f') = (eta/2) a_m + Φ1_m`,
//!   `coeff_m(f'') = (eta/2)^2 a_m + Φ2_m` for `f(0) = f'(0) = 0`, with
//!   `Φ1_m = eta Σ_{k<m} a_k` and `Φ2_m = eta^2 Σ_{k<m} (m-k) a_k`.

use crate::error::{Error, Result};
use crate::quadrature::PanelRule;
use crate::scalar::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Gauss nodes per quadrature panel.
const PANEL_POINTS: usize = 16;

/// Panel width cap in the scaled variable `s = eta t`.
const MAX_PANEL_S: f64 = 8.0;

/// Laguerre functions below this magnitude past the turning point are
/// treated as having decayed.
const DECAYED: f64 = 1e-40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaguerreConfig {
    /// Time-scale parameter (1/time).
    pub eta: f64,
    /// Half window duration.
    pub tau: f64,
    /// Hard cap on the series length.
    pub m_max: usize,
    /// Truncation tolerance for synthesis contributions.
    pub eps_lag: f64,
}

impl LaguerreConfig {
    pub fn new(eta: f64, tau: f64, m_max: usize, eps_lag: f64) -> Result<Self> {
        let cfg = Self { eta, tau, m_max, eps_lag };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidParameter(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau must be positive, got {}", self.tau)));
        }
        if self.m_max < 1 {
            return Err(Error::InvalidParameter("m_max must be at least 1".into()));
        }
        if !(self.eps_lag > 0.0 && self.eps_lag < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eps_lag must lie in (0, 1), got {}",
                self.eps_lag
            )));
        }
        Ok(())
    }
}

/// Coefficients `a_0 .. a_{M-1}` of a Laguerre expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct LaguerreSeries {
    pub config: LaguerreConfig,
    pub coeffs: Vec<C64>,
}

impl LaguerreSeries {
    pub fn new(config: LaguerreConfig, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() > config.m_max {
            return Err(Error::InvalidParameter(format!(
                "{} coefficients exceed m_max = {}",
                coeffs.len(),
                config.m_max
            )));
        }
        Ok(Self { config, coeffs })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Resums the series at time `t >= 0`: `eta * Σ a_m l_m(eta t)`.
    pub fn evaluate(&self, t: f64) -> Result<C64> {
        if t < 0.0 {
            return Err(Error::InvalidParameter(format!("negative time {t}")));
        }
        let mut l = vec![0.0; self.coeffs.len()];
        fill_laguerre_functions(self.config.eta * t, &mut l);
        let sum: C64 = self.coeffs.iter().zip(&l).map(|(a, l)| a * l).sum();
        Ok(sum * self.config.eta)
    }
}

/// Values that can be fed through a [`RecurrenceState`].
pub trait Accumulable: Clone {
    /// `self += alpha * x`
    fn accumulate(&mut self, alpha: f64, x: &Self);
    /// A zero of the same shape.
    fn zero_like(&self) -> Self;
}

impl Accumulable for f64 {
    fn accumulate(&mut self, alpha: f64, x: &Self) {
        *self += alpha * x;
    }
    fn zero_like(&self) -> Self {
        0.0
    }
}

impl Accumulable for C64 {
    fn accumulate(&mut self, alpha: f64, x: &Self) {
        *self += x * alpha;
    }
    fn zero_like(&self) -> Self {
        C64::new(0.0, 0.0)
    }
}

impl<T: Accumulable> Accumulable for Vec<T> {
    fn accumulate(&mut self, alpha: f64, x: &Self) {
        assert_eq!(self.len(), x.len(), "accumulator shape mismatch");
        for (a, b) in self.iter_mut().zip(x) {
            a.accumulate(alpha, b);
        }
    }
    fn zero_like(&self) -> Self {
        self.iter().map(Accumulable::zero_like).collect()
    }
}

/// Running sums `s0 = Σ_{k<m} f_k` and `s1 = Σ_{k<m} k f_k`.
///
/// Readouts at the current index `m`: `Φ1 = eta s0`, `Φ2 = eta^2 (m s0 - s1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceState<T> {
    s0: T,
    s1: T,
    m: usize,
}

impl<T: Accumulable> RecurrenceState<T> {
    pub fn new(zero: T) -> Self {
        let s1 = zero.zero_like();
        Self { s0: zero.zero_like(), s1, m: 0 }
    }

    pub fn push(&mut self, f: &T) {
        self.s0.accumulate(1.0, f);
        self.s1.accumulate(self.m as f64, f);
        self.m += 1;
    }

    pub fn index(&self) -> usize {
        self.m
    }

    pub fn sum(&self) -> &T {
        &self.s0
    }

    pub fn weighted_sum(&self) -> &T {
        &self.s1
    }

    pub fn phi1(&self, eta: f64) -> T {
        let mut out = self.s0.zero_like();
        out.accumulate(eta, &self.s0);
        out
    }

    pub fn phi2(&self, eta: f64) -> T {
        let mut out = self.s0.zero_like();
        out.accumulate(eta * eta * self.m as f64, &self.s0);
        out.accumulate(-eta * eta, &self.s1);
        out
    }

    pub fn reset(&mut self) {
        self.s0 = self.s0.zero_like();
        self.s1 = self.s1.zero_like();
        self.m = 0;
    }
}

/// `l_m(t)` for a single index.
pub fn laguerre_function(m: usize, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("Laguerre functions need t >= 0, got {t}")));
    }
    let mut out = vec![0.0; m + 1];
    fill_laguerre_functions(t, &mut out);
    Ok(out[m])
}

/// Fills `out[m] = l_m(s)` for `m = 0..out.len()` with the three-term
/// recurrence `l_{m+1} = ((2m+1-s) l_m - m l_{m-1}) / (m+1)`.
///
/// The recurrence runs on a rescaled copy of the polynomial values with the
/// exponential weight carried as a logarithm, so large `s` neither
/// underflows the seed `exp(-s/2)` nor overflows `L_m(s)`.
pub fn fill_laguerre_functions(s: f64, out: &mut [f64]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    let mut log_scale = -0.5 * s;
    let mut factor = log_scale.exp();
    let emit = |p: f64, factor: f64, log_scale: f64| -> f64 {
        if factor > 1e-280 || p == 0.0 {
            p * factor
        } else {
            p.signum() * (p.abs().ln() + log_scale).exp()
        }
    };
    let mut prev = 0.0;
    let mut cur = 1.0;
    out[0] = emit(cur, factor, log_scale);
    for m in 0..n - 1 {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0 - s) * cur - mf * prev) / (mf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > 1e100 {
            cur *= 1e-100;
            prev *= 1e-100;
            log_scale += 100.0 * std::f64::consts::LN_10;
            factor = log_scale.exp();
        }
        out[m + 1] = emit(cur, factor, log_scale);
    }
}

/// Fourier image of the bilateral Laguerre function `φ_m(eta t)`, evaluated
/// in polar form so that large `|m|` neither overflows nor drifts.
pub fn phi_fourier(m: i64, omega: f64, eta: f64) -> C64 {
    let half = 0.5 * eta;
    let modulus = eta / (2.0 * PI) / omega.hypot(half);
    let theta = omega.atan2(half);
    let step = (PI - 2.0 * theta).rem_euclid(2.0 * PI);
    let phase = ((m as f64) * step).rem_euclid(2.0 * PI) - theta;
    C64::from_polar(modulus, phase)
}

/// Weight `(eta/2) φ̃_m(ω)` multiplying coefficient `m` in spectral synthesis.
pub fn synthesis_weight(m: usize, omega: f64, eta: f64) -> C64 {
    phi_fourier(m as i64, omega, eta) * (0.5 * eta)
}

/// Spectral synthesis `(eta/2) Σ a_m φ̃_m(ω)`.
pub fn synthesize_spectrum(series: &LaguerreSeries, omega: f64) -> C64 {
    let eta = series.config.eta;
    series
        .coeffs
        .iter()
        .enumerate()
        .map(|(m, a)| a * synthesis_weight(m, omega, eta))
        .sum()
}

struct QuadratureOutcome {
    coeffs: Vec<C64>,
    peak: f64,
}

/// Integrates `f(t) l_m(eta t)` over `[0, t_end]` for all `m < m_count` with
/// composite Gauss–Legendre panels laid out in `s = eta t`.
///
/// Panels are never wider than 8 in `s` (i.e. `8/eta` in time) nor than an
/// eighth of the period of `omega_hint`; inside the oscillatory region of the
/// highest retained index the panels follow its phase `2 sqrt(nu s)` in
/// steps of π. Integration ends early once every retained function has
/// decayed past its turning point.
fn laguerre_quadrature(
    f: &dyn Fn(f64) -> C64,
    eta: f64,
    t_end: f64,
    m_count: usize,
    omega_hint: f64,
) -> QuadratureOutcome {
    let mut coeffs = vec![C64::new(0.0, 0.0); m_count];
    let mut peak: f64 = 0.0;
    if m_count == 0 || t_end <= 0.0 {
        return QuadratureOutcome { coeffs, peak };
    }
    let rule = PanelRule::new(PANEL_POINTS);
    let nu = m_count as f64 - 0.5;
    let turning = 4.0 * nu + 2.0;
    let s_end = eta * t_end;
    let mut cap = MAX_PANEL_S;
    if omega_hint != 0.0 {
        cap = cap.min(2.0 * PI * eta / (8.0 * omega_hint.abs()));
    }
    let phase_step = PI / (2.0 * nu.sqrt());
    let mut l = vec![0.0; m_count];
    let mut s = 0.0;
    while s < s_end {
        let mut width = cap;
        if s < turning {
            let r = s.sqrt() + phase_step;
            width = width.min(r * r - s);
        }
        let b = (s + width).min(s_end);
        rule.for_each_node(s, b, |sn, ws| {
            fill_laguerre_functions(sn, &mut l);
            let fv = f(sn / eta);
            peak = peak.max(fv.norm());
            let w = ws / eta;
            let fw = fv * w;
            for (c, lm) in coeffs.iter_mut().zip(&l) {
                *c += fw * *lm;
            }
        });
        s = b;
        if s > turning {
            fill_laguerre_functions(s, &mut l);
            if l.iter().all(|v| v.abs() < DECAYED) {
                break;
            }
        }
    }
    QuadratureOutcome { coeffs, peak }
}

/// Coefficients `c_m = ∫_0^{2 tau} exp(iωt) l_m(eta t) dt` of the
/// rectangular-window harmonic `exp(iωt) Π(t - tau)`.
pub fn window_source_coeffs(omega: f64, config: &LaguerreConfig, m_count: usize) -> Result<Vec<C64>> {
    config.validate()?;
    if m_count > config.m_max {
        return Err(Error::InvalidParameter(format!(
            "m_count = {m_count} exceeds m_max = {}",
            config.m_max
        )));
    }
    let f = move |t: f64| C64::from_polar(1.0, omega * t);
    Ok(laguerre_quadrature(&f, config.eta, 2.0 * config.tau, m_count, omega).coeffs)
}

/// Coefficients `a_m = ∫_0^∞ f(t) l_m(eta t) dt` of a decaying signal.
///
/// The integral is truncated at `20 tau`; signals that have not decayed there
/// (relative to their peak) are rejected.
pub fn forward_coeffs(
    f: impl Fn(f64) -> C64,
    config: &LaguerreConfig,
    m_count: usize,
) -> Result<LaguerreSeries> {
    config.validate()?;
    if m_count > config.m_max {
        return Err(Error::InvalidParameter(format!(
            "m_count = {m_count} exceeds m_max = {}",
            config.m_max
        )));
    }
    let t_end = 20.0 * config.tau;
    let outcome = laguerre_quadrature(&f, config.eta, t_end, m_count, 0.0);
    let mut tail: f64 = 0.0;
    for k in 0..=32 {
        let t = t_end * (0.95 + 0.05 * k as f64 / 32.0);
        tail = tail.max(f(t).norm());
    }
    let peak = outcome.peak.max(tail);
    if tail > 1e-10 * peak {
        return Err(Error::NonDecaying(format!(
            "|f| = {tail:e} near t = {t_end} against peak {peak:e}"
        )));
    }
    LaguerreSeries::new(*config, outcome.coeffs)
}

/// Coefficients of the first or second time derivative of the represented
/// signal, assuming `f(0) = f'(0) = 0`.
pub fn derivative_coeffs(series: &LaguerreSeries, order: u32) -> Result<LaguerreSeries> {
    let eta = series.config.eta;
    let half = 0.5 * eta;
    let mut state = RecurrenceState::new(C64::new(0.0, 0.0));
    let mut out = Vec::with_capacity(series.coeffs.len());
    for a in &series.coeffs {
        let d = match order {
            1 => a * half + state.phi1(eta),
            2 => a * (half * half) + state.phi2(eta),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "derivative order must be 1 or 2, got {order}"
                )))
            }
        };
        out.push(d);
        state.push(a);
    }
    LaguerreSeries::new(series.config, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(eta: f64, tau: f64, m_max: usize) -> LaguerreConfig {
        LaguerreConfig::new(eta, tau, m_max, 1e-5).unwrap()
    }

    #[test]
    fn laguerre_function_closed_forms() {
        assert_eq!(laguerre_function(0, 0.0).unwrap(), 1.0);
        assert!((laguerre_function(7, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let l1 = laguerre_function(1, 2.0).unwrap();
        assert!((l1 - (-(-1.0f64).exp())).abs() < 1e-15, "{l1}");
        assert!((l1 + 0.36787944117144233).abs() < 1e-15);
    }

    #[test]
    fn laguerre_function_rejects_negative_time() {
        assert!(laguerre_function(3, -0.5).is_err());
        assert!(laguerre_function(3, f64::NAN).is_err());
    }

    #[test]
    fn large_argument_does_not_underflow_high_orders() {
        // exp(-s/2) alone underflows here, yet l_500 is still O(1e-2)
        let mut l = vec![0.0; 501];
        fill_laguerre_functions(1800.0, &mut l);
        assert_eq!(l[0], 0.0);
        assert!(l[500].abs() > 1e-6 && l[500].abs() <= 1.0, "{}", l[500]);
    }

    #[test]
    fn config_invariants() {
        assert!(LaguerreConfig::new(0.0, 1.0, 4, 1e-5).is_err());
        assert!(LaguerreConfig::new(1.0, -1.0, 4, 1e-5).is_err());
        assert!(LaguerreConfig::new(1.0, 1.0, 0, 1e-5).is_err());
        assert!(LaguerreConfig::new(1.0, 1.0, 4, 1.0).is_err());
        assert!(LaguerreConfig::new(1.0, 1.0, 4, 0.5).is_ok());
    }

    #[test]
    fn phi_fourier_direct_substitution() {
        let v = phi_fourier(0, 0.0, 2.0);
        assert!((v.re - 1.0 / PI).abs() < 1e-15 && v.im.abs() < 1e-15);
    }

    #[test]
    fn phi_fourier_modulus_is_index_free() {
        let expect = 2.0 / (2.0 * PI) / (9.0f64 + 1.0).sqrt();
        for m in [-40, -3, 0, 5, 9, 100_000] {
            assert!((phi_fourier(m, 3.0, 2.0).norm() - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn phi_fourier_matches_direct_power_form() {
        let (omega, eta) = (1.3, 0.7);
        let num = C64::new(-eta / 2.0, omega);
        let den = C64::new(eta / 2.0, omega);
        for m in -6i32..12 {
            let direct = num.powi(m) / den.powi(m + 1) * (eta / (2.0 * PI));
            let polar = phi_fourier(m as i64, omega, eta);
            assert!((direct - polar).norm() < 1e-13 * direct.norm(), "m = {m}");
        }
    }

    #[test]
    fn accumulator_small_sequence() {
        let mut st = RecurrenceState::new(0.0);
        assert_eq!(st.phi1(1.0), 0.0);
        assert_eq!(st.phi2(1.0), 0.0);
        st.push(&1.0);
        st.push(&1.0);
        assert_eq!(st.phi1(1.0), 2.0);
        assert_eq!(st.phi2(1.0), 3.0);
        st.push(&1.0);
        assert_eq!(st.index(), 3);
        st.reset();
        assert_eq!(st.index(), 0);
        assert_eq!(*st.sum(), 0.0);
    }

    #[test]
    fn window_coeffs_unit_case() {
        let c = window_source_coeffs(0.0, &cfg(2.0, 1.0, 8), 1).unwrap();
        let expect = 1.0 - (-2.0f64).exp();
        assert!((c[0].re - expect).abs() < 1e-14 && c[0].im.abs() < 1e-16);
    }

    #[test]
    fn window_coeffs_vanish_with_window() {
        let c = window_source_coeffs(0.3, &cfg(2.0, 1e-12, 8), 8).unwrap();
        assert!(c.iter().all(|v| v.norm() < 1e-11));
    }

    #[test]
    fn window_coeffs_respect_m_max() {
        assert!(window_source_coeffs(0.3, &cfg(2.0, 1.0, 8), 9).is_err());
    }

    #[test]
    fn zero_signal_has_zero_coefficients() {
        let s = forward_coeffs(|_| C64::new(0.0, 0.0), &cfg(1.0, 1.0, 16), 16).unwrap();
        assert!(s.coeffs.iter().all(|c| *c == C64::new(0.0, 0.0)));
        let d = derivative_coeffs(&s, 2).unwrap();
        assert!(d.coeffs.iter().all(|c| *c == C64::new(0.0, 0.0)));
    }

    #[test]
    fn constant_signal_is_rejected() {
        let err = forward_coeffs(|_| C64::new(1.0, 0.0), &cfg(1.0, 1.0, 8), 8).unwrap_err();
        assert!(matches!(err, Error::NonDecaying(_)));
    }

    #[test]
    fn derivative_order_is_checked() {
        let s = LaguerreSeries::new(cfg(1.0, 1.0, 2), vec![C64::new(1.0, 0.0)]).unwrap();
        assert!(derivative_coeffs(&s, 3).is_err());
    }

    #[test]
    fn empty_synthesis_is_zero() {
        let s = LaguerreSeries::new(cfg(1.0, 1.0, 2), vec![]).unwrap();
        assert_eq!(synthesize_spectrum(&s, 0.4), C64::new(0.0, 0.0));
    }

    #[test]
    fn synthesis_scales_linearly() {
        let coeffs: Vec<C64> = (0..10).map(|k| C64::new(k as f64, 1.0 - k as f64)).collect();
        let s = LaguerreSeries::new(cfg(3.0, 1.0, 10), coeffs.clone()).unwrap();
        let c = C64::new(0.3, -2.0);
        let scaled = LaguerreSeries::new(s.config, coeffs.iter().map(|a| a * c).collect()).unwrap();
        let lhs = synthesize_spectrum(&scaled, 0.8);
        let rhs = synthesize_spectrum(&s, 0.8) * c;
        assert!((lhs - rhs).norm() < 1e-13 * rhs.norm());
    }
}
