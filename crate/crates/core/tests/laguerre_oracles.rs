use lagmax::laguerre::*;
use lagmax::quadrature::PanelRule;
use lagmax::C64;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

fn cfg(eta: f64, tau: f64, m_max: usize) -> LaguerreConfig {
    LaguerreConfig::new(eta, tau, m_max, 1e-5).unwrap()
}

/// `∫_a^b f` with fixed-width Gauss panels, independent of the library's
/// adaptive layout.
fn integrate(a: f64, b: f64, width: f64, f: impl Fn(f64) -> C64) -> C64 {
    let rule = PanelRule::new(24);
    let n = ((b - a) / width).ceil() as usize;
    let h = (b - a) / n as f64;
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..n {
        rule.for_each_node(a + k as f64 * h, a + (k + 1) as f64 * h, |t, w| acc += f(t) * w);
    }
    acc
}

/// `L_m(x)` in exact rational arithmetic.
fn laguerre_poly_exact(m: u32, x: &BigRational) -> BigRational {
    let mut sum = BigRational::zero();
    let mut binom = BigInt::one();
    let mut fact = BigInt::one();
    let mut pow = BigRational::one();
    for k in 0..=m {
        if k > 0 {
            binom = binom * BigInt::from(m - k + 1) / BigInt::from(k);
            fact *= BigInt::from(k);
            pow = &pow * x;
        }
        let term = BigRational::new(binom.clone(), fact.clone()) * &pow;
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum
}

#[test]
fn high_order_value_matches_exact_polynomial() {
    let x = BigRational::new(BigInt::from(137), BigInt::from(10));
    let exact = laguerre_poly_exact(40, &x).to_f64().unwrap() * (-6.85f64).exp();
    let got = laguerre_function(40, 13.7).unwrap();
    assert!((got - exact).abs() < 1e-13, "{got} vs {exact}");
}

#[test]
fn orthonormal_up_to_fifty() {
    let n = 51;
    let rule = PanelRule::new(24);
    let mut gram = vec![vec![0.0; n]; n];
    let mut l = vec![0.0; n];
    // e^{-t} < 1e-16 well before 300 and every l_m has turned at 4m + 2
    let width = 0.5;
    for k in 0..600 {
        rule.for_each_node(k as f64 * width, (k + 1) as f64 * width, |t, w| {
            fill_laguerre_functions(t, &mut l);
            for i in 0..n {
                for j in 0..=i {
                    gram[i][j] += w * l[i] * l[j];
                }
            }
        });
    }
    for i in 0..n {
        for j in 0..=i {
            let target = if i == j { 1.0 } else { 0.0 };
            assert!((gram[i][j] - target).abs() < 1e-8, "({i},{j}) = {}", gram[i][j]);
        }
    }
}

#[test]
fn phi_fourier_matches_fourier_integral() {
    let (eta, omega) = (75.0, 1.5);
    let direct = integrate(0.0, 1.5, 0.005, |t| {
        C64::from_polar(laguerre_function(3, eta * t).unwrap(), -omega * t)
    }) * (eta / (2.0 * PI));
    let got = phi_fourier(3, omega, eta);
    assert!((got - direct).norm() < 1e-8 * got.norm(), "{got} vs {direct}");
}

#[test]
fn window_coeffs_closed_form_at_zero_frequency() {
    let c = window_source_coeffs(0.0, &cfg(2.0, 1.0, 4), 1).unwrap();
    assert!((c[0].re - (1.0 - (-2.0f64).exp())).abs() < 1e-13);
    assert!(c[0].im.abs() < 1e-15);
}

/// With `eta tau` this large the window is effectively infinite, so the
/// coefficients are the Laplace image `(p - 1/2)^m / (p + 1/2)^{m+1} / eta` at
/// `p = -iω/eta`.
fn laplace_window(m: usize, omega: f64, eta: f64) -> C64 {
    let p = C64::new(0.0, -omega / eta);
    (p - 0.5).powu(m as u32) / (p + 0.5).powu(m as u32 + 1) / eta
}

const WINDOW_TABLE: [(f64, f64); 11] = [
    (2.66665918040997485e-2, 4.46803034176200279e-5),
    (-2.66662923546727194e-2, -1.34040408520529400e-4),
    (2.66656934591813048e-2, 2.23399008432080792e-4),
    (-2.66647951243507327e-2, -3.12755099710149435e-4),
    (2.66635973602687391e-2, 4.02107678940780621e-4),
    (-2.66621001803854854e-2, -4.91455742749458309e-4),
    (2.66603036015133806e-2, 5.80798287812371475e-4),
    (-2.66582076438269013e-2, -6.70134310867681170e-4),
    (2.66558123308623593e-2, 7.59462808726786846e-4),
    (-2.66531176895176553e-2, -8.48782778285591321e-4),
    (2.66501237500519489e-2, 9.38093216535764666e-4),
];

#[test]
fn window_coeffs_table() {
    let omega = 2.0 * PI / 100.0;
    let config = cfg(75.0, 200.0 * PI, 16);
    let c = window_source_coeffs(omega, &config, 11).unwrap();
    for (m, (cm, frozen)) in c.iter().zip(WINDOW_TABLE).enumerate() {
        let oracle = laplace_window(m, omega, 75.0);
        assert!((cm - oracle).norm() < 1e-12 * oracle.norm(), "m={m}: {cm} vs {oracle}");
        let frozen = C64::new(frozen.0, frozen.1);
        assert!((cm - frozen).norm() < 1e-12 * oracle.norm(), "m={m}: {cm} vs frozen {frozen}");
    }
}

#[test]
fn forward_of_a_laguerre_function_is_a_delta() {
    let eta = 3.0;
    let s = forward_coeffs(|t| C64::new(laguerre_function(3, eta * t).unwrap(), 0.0), &cfg(eta, 5.0, 12), 12)
        .unwrap();
    for (m, a) in s.coeffs.iter().enumerate() {
        let target = if m == 3 { 1.0 / eta } else { 0.0 };
        assert!((a - target).norm() < 1e-10, "m={m}: {a}");
    }
}

fn t2e(t: f64) -> C64 {
    C64::new(t * t * (-t).exp(), 0.0)
}

#[test]
fn resummation_reproduces_signal() {
    let s = forward_coeffs(t2e, &cfg(2.0, 5.0, 16), 16).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..=200 {
        let t = 10.0 * k as f64 / 200.0;
        worst = worst.max((s.evaluate(t).unwrap() - t2e(t)).norm());
    }
    assert!(worst < 1e-8, "sup error {worst}");
}

fn rel_l2(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

#[test]
fn derivative_of_t2_exp() {
    let c = cfg(2.0, 5.0, 32);
    let s = forward_coeffs(t2e, &c, 32).unwrap();
    let d1 = forward_coeffs(|t| C64::new((2.0 * t - t * t) * (-t).exp(), 0.0), &c, 32).unwrap();
    let d2 = forward_coeffs(|t| C64::new((2.0 - 4.0 * t + t * t) * (-t).exp(), 0.0), &c, 32).unwrap();
    assert!(rel_l2(&derivative_coeffs(&s, 1).unwrap().coeffs, &d1.coeffs) < 1e-8);
    assert!(rel_l2(&derivative_coeffs(&s, 2).unwrap().coeffs, &d2.coeffs) < 1e-8);
}

/// `f = t² (b + c t) e^{-a t} cos(d t)` and its first two derivatives.
fn smooth_family(a: f64, b: f64, c: f64, d: f64) -> [Box<dyn Fn(f64) -> C64>; 3] {
    let g = move |t: f64| t * t * (b + c * t);
    let g1 = move |t: f64| 2.0 * b * t + 3.0 * c * t * t;
    let g2 = move |t: f64| 2.0 * b + 6.0 * c * t;
    // h = e^{-at} cos(dt)
    let h = move |t: f64| (-a * t).exp() * (d * t).cos();
    let h1 = move |t: f64| (-a * t).exp() * (-a * (d * t).cos() - d * (d * t).sin());
    let h2 = move |t: f64| (-a * t).exp() * ((a * a - d * d) * (d * t).cos() + 2.0 * a * d * (d * t).sin());
    [
        Box::new(move |t: f64| C64::new(g(t) * h(t), 0.0)),
        Box::new(move |t: f64| C64::new(g1(t) * h(t) + g(t) * h1(t), 0.0)),
        Box::new(move |t: f64| C64::new(g2(t) * h(t) + 2.0 * g1(t) * h1(t) + g(t) * h2(t), 0.0)),
    ]
}

#[test]
fn derivative_identity_on_twenty_smooth_functions() {
    let mut rng = StdRng::seed_from_u64(20);
    let mut next = move || rng.gen::<f64>();
    let c = cfg(1.5, 5.0, 64);
    for k in 0..20 {
        let (a, b, cc, d) = (0.6 + next(), 0.5 + next(), next() - 0.5, 2.0 * next());
        let [f, f1, f2] = smooth_family(a, b, cc, d);
        let s = forward_coeffs(f, &c, 64).unwrap();
        let e1 = rel_l2(&derivative_coeffs(&s, 1).unwrap().coeffs, &forward_coeffs(f1, &c, 64).unwrap().coeffs);
        let e2 = rel_l2(&derivative_coeffs(&s, 2).unwrap().coeffs, &forward_coeffs(f2, &c, 64).unwrap().coeffs);
        assert!(e1 < 1e-6 && e2 < 1e-6, "function {k}: {e1:e} {e2:e}");
    }
}

#[test]
fn windowed_exponential_synthesis_has_constant_ratio() {
    // (η/2) F{g}(ω0) with F{g}(ω0) = 2τ / 2π
    let eta = 1.0;
    for (omega, tau) in [(0.3, 20.0), (0.5, 20.0), (0.3, 40.0)] {
        let config = cfg(eta, tau, 4000);
        let c = window_source_coeffs(omega, &config, 4000).unwrap();
        let s = LaguerreSeries::new(config, c).unwrap();
        let ratio = synthesize_spectrum(&s, omega) / (2.0 * tau / (2.0 * PI));
        assert!((ratio - 0.5 * eta).norm() < 5e-3, "ω={omega} τ={tau}: ratio {ratio}");
    }
}

#[test]
fn accumulator_matches_naive_sums_for_long_sequences() {
    let eta = 0.7;
    let seq: Vec<f64> = (0..1000).map(|k| ((k * 7919) % 1013) as f64 / 1013.0 - 0.4).collect();
    let mut st = RecurrenceState::new(0.0);
    for (m, f) in seq.iter().enumerate() {
        let p1: f64 = eta * seq[..m].iter().sum::<f64>();
        let p2: f64 = eta * eta * seq[..m].iter().enumerate().map(|(k, v)| (m - k) as f64 * v).sum::<f64>();
        assert!((st.phi1(eta) - p1).abs() <= 1e-13 * p1.abs().max(1e-300) + 1e-300);
        assert!((st.phi2(eta) - p2).abs() <= 1e-13 * p2.abs().max(1e-300) + 1e-300);
        st.push(f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laguerre_functions_are_bounded(m in 0usize..=200, t in 0.0f64..1e4) {
        prop_assert!(laguerre_function(m, t).unwrap().abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn phi_modulus_is_index_free(m in -500i64..500, omega in -20.0f64..20.0, eta in 0.1f64..100.0) {
        let a = phi_fourier(m, omega, eta).norm();
        let b = phi_fourier(0, omega, eta).norm();
        prop_assert!((a - b).abs() <= 1e-15 * b);
    }

    #[test]
    fn accumulator_random_sequences(seq in prop::collection::vec(-1.0f64..1.0, 1..50), eta in 0.1f64..10.0) {
        let mut st = RecurrenceState::new(0.0);
        for f in &seq {
            st.push(f);
        }
        let m = seq.len();
        let p1 = eta * seq.iter().sum::<f64>();
        let p2 = eta * eta * seq.iter().enumerate().map(|(k, v)| (m - k) as f64 * v).sum::<f64>();
        let scale1: f64 = eta * seq.iter().map(|v| v.abs()).sum::<f64>();
        let scale2: f64 = eta * eta * seq.iter().enumerate().map(|(k, v)| (m - k) as f64 * v.abs()).sum::<f64>();
        prop_assert!((st.phi1(eta) - p1).abs() <= 1e-13 * scale1);
        prop_assert!((st.phi2(eta) - p2).abs() <= 1e-13 * scale2);
    }

    #[test]
    fn transforms_are_linear(
        a in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40),
        b in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40),
        alpha in -3.0f64..3.0,
        omega in -2.0f64..2.0,
    ) {
        let n = a.len().min(b.len());
        let c = cfg(1.3, 2.0, 64);
        let sa: Vec<C64> = a[..n].iter().map(|(x, y)| C64::new(*x, *y)).collect();
        let sb: Vec<C64> = b[..n].iter().map(|(x, y)| C64::new(*x, *y)).collect();
        let comb: Vec<C64> = sa.iter().zip(&sb).map(|(x, y)| x * alpha + y).collect();
        let mk = |v: &[C64]| LaguerreSeries::new(c, v.to_vec()).unwrap();
        let (x, y, z) = (mk(&sa), mk(&sb), mk(&comb));
        let syn = synthesize_spectrum(&z, omega);
        let expect = synthesize_spectrum(&x, omega) * alpha + synthesize_spectrum(&y, omega);
        prop_assert!((syn - expect).norm() <= 1e-12 * (1.0 + expect.norm()));
        for order in [1, 2] {
            let dz = derivative_coeffs(&z, order).unwrap().coeffs;
            let dx = derivative_coeffs(&x, order).unwrap().coeffs;
            let dy = derivative_coeffs(&y, order).unwrap().coeffs;
            for k in 0..n {
                let e = dx[k] * alpha + dy[k];
                prop_assert!((dz[k] - e).norm() <= 1e-12 * (1.0 + e.norm()));
            }
        }
    }
}
