//! Closed-form and quadrature evaluators for the tunneling probability: the
//! Landau-Zener exponential, the dephasing closed form built on the algebraic
//! Q-function, its weak- and strong-dephasing asymptotes, and the general
//! finite-interval quadrature formula for time-dependent rates.

use serde::Serialize;

use crate::error::Error;
use crate::model::{
    gap, spectral, tunneling_numerator_closed, tunneling_numerator_numeric, ModelParams,
};
use crate::quad::{integrate_adaptive, integrate_real_line};

/// How a tunneling probability was produced. The serialized tags are part of
/// the output file contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    #[serde(rename = "ode")]
    Ode,
    #[serde(rename = "quadrature_eq10")]
    Quadrature,
    #[serde(rename = "closed_form_eq6")]
    ClosedForm,
    #[serde(rename = "lz_eq2")]
    LandauZener,
    #[serde(rename = "asymptotic")]
    Asymptotic,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Ode => "ode",
            Method::Quadrature => "quadrature_eq10",
            Method::ClosedForm => "closed_form_eq6",
            Method::LandauZener => "lz_eq2",
            Method::Asymptotic => "asymptotic",
        }
    }
}

/// Tunneling probability plus diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct TunnelingResult {
    pub t: f64,
    pub method: Method,
    pub tolerance_achieved: f64,
    pub evals: u64,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
}

impl TunnelingResult {
    pub fn analytic(t: f64, method: Method) -> Self {
        TunnelingResult {
            t,
            method,
            tolerance_achieved: 0.0,
            evals: 0,
            accepted_steps: 0,
            rejected_steps: 0,
        }
    }
}

/// The algebraic function
/// `Q(x) = (pi/2) x (2 + sqrt(1+x^2)) / (sqrt(1+x^2) (sqrt(1+x^2) + 1)^2)`,
/// the dephasing-to-gap shape of the tunneling rate.
pub fn q_closed(x: f64) -> f64 {
    assert!(x >= 0.0, "q_closed requires x >= 0, got {x}");
    let u = (1.0 + x * x).sqrt();
    let up1 = u + 1.0;
    std::f64::consts::FRAC_PI_2 * x * (2.0 + u) / (u * up1 * up1)
}

/// Q as the real-line integral `x * int (t^2+1)^-2 (t^2+1+x^2)^-1 dt`,
/// the independent route cross-checking [`q_closed`].
pub fn q_quadrature(x: f64, tol: f64) -> Result<f64, Error> {
    assert!(x >= 0.0, "q_quadrature requires x >= 0, got {x}");
    if x == 0.0 {
        return Ok(0.0);
    }
    let x2 = x * x;
    let r = integrate_real_line(
        move |t| {
            let u = t * t + 1.0;
            1.0 / (u * u * (u + x2))
        },
        tol,
    )?;
    Ok(x * r.value)
}

/// Weak-dephasing asymptote `Q(x) ~ (3 pi / 8) x`.
pub fn asymptotic_weak(x: f64) -> f64 {
    0.375 * std::f64::consts::PI * x
}

/// Strong-dephasing (Zeno) asymptote `Q(x) ~ pi / (2x)`.
pub fn asymptotic_strong(x: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 / x
}

/// Location and value of the maximum of Q, by golden-section search on
/// [0.5, 2.0] to 1e-8 (Q is unimodal there; see the derivative sign test).
pub fn q_max() -> (f64, f64) {
    golden_section_max(q_closed, 0.5, 2.0, 1e-8)
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Landau-Zener probability `exp(-pi g0^2 / (2 hbar eps))` for the
/// dephasing-free sweep.
pub fn lz_probability(g0: f64, eps: f64, hbar: f64) -> f64 {
    assert!(eps > 0.0 && g0 >= 0.0 && hbar > 0.0);
    (-std::f64::consts::FRAC_PI_2 * g0 * g0 / (hbar * eps)).exp()
}

/// Leading-order dephasing tunneling probability
/// `(eps hbar / 2 g0^2) Q(hbar gamma / g0)` for a constant rate over the
/// whole real line.
pub fn dephasing_tunneling(g0: f64, gamma: f64, eps: f64, hbar: f64) -> f64 {
    eps * dephasing_slope(g0, gamma, hbar)
}

/// Slope of the dephasing tunneling probability with respect to `eps`:
/// `(hbar / 2 g0^2) Q(hbar gamma / g0)`.
pub fn dephasing_slope(g0: f64, gamma: f64, hbar: f64) -> f64 {
    assert!(g0 > 0.0 && gamma >= 0.0 && hbar > 0.0);
    hbar / (2.0 * g0 * g0) * q_closed(hbar * gamma / g0)
}

/// Which route computes the `tr(P+ dP-^2 P+)` numerator of the
/// finite-interval integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumeratorMode {
    /// Closed form `g0^2 / (4 g^4)`.
    Closed,
    /// Trace of the spectral matrices; must agree with the closed form to
    /// 1e-12 relative.
    Numeric,
}

/// Slope with respect to `eps` of the finite-interval tunneling probability:
/// `2 hbar int_{s0}^{s1} gamma(s) N(s) / (g^2(s) + hbar^2 gamma^2(s)) ds`
/// with `N` the tunneling numerator. Exposed separately because window
/// comparisons fit slopes, keeping `eps` out of the quadrature.
pub fn finite_interval_slope(
    p: &ModelParams,
    s0: f64,
    s1: f64,
    tol: f64,
    mode: NumeratorMode,
) -> Result<(f64, f64, u64), Error> {
    if !(s0 < s1) {
        return Err(Error::invalid("window", format!("need s0 < s1, got [{s0}, {s1}]")));
    }
    let integrand = |s: f64| {
        let gamma_eff = p.gamma_eff(s);
        if gamma_eff == 0.0 {
            return 0.0;
        }
        let g = gap(s, p);
        let num = match mode {
            NumeratorMode::Closed => tunneling_numerator_closed(s, p),
            NumeratorMode::Numeric => tunneling_numerator_numeric(&spectral(s, p)),
        };
        gamma_eff * num / (g * g + gamma_eff * gamma_eff)
    };
    let r = integrate_adaptive(integrand, s0, s1, tol)?;
    Ok((2.0 * p.hbar * r.value, 2.0 * p.hbar * r.error_estimate, r.evals))
}

/// Finite-interval tunneling probability
/// `T = 2 eps hbar^2 int_{s0}^{s1} gamma(s) tr(P+ dP-^2 P+) / (g^2 + hbar^2 gamma^2) ds`,
/// valid for time-dependent rates.
pub fn finite_interval_tunneling(
    p: &ModelParams,
    eps: f64,
    s0: f64,
    s1: f64,
    tol: f64,
    mode: NumeratorMode,
) -> Result<TunnelingResult, Error> {
    if !(eps > 0.0) {
        return Err(Error::invalid("eps", format!("{eps} must be > 0")));
    }
    let (slope, err, evals) = finite_interval_slope(p, s0, s1, tol, mode)?;
    Ok(TunnelingResult {
        t: eps * slope,
        method: Method::Quadrature,
        tolerance_achieved: eps * err,
        evals,
        accepted_steps: 0,
        rejected_steps: 0,
    })
}

/// Tail of the slope integral outside `[-s_cut, s_cut]` for a constant rate:
/// the difference between the full-line closed form and the windowed
/// quadrature.
pub fn slope_tail_estimate(p: &ModelParams, s_cut: f64, tol: f64) -> Result<f64, Error> {
    let gamma = p
        .gamma
        .constant_value()
        .ok_or_else(|| Error::invalid("gamma", "tail estimate needs a constant rate"))?;
    let full = dephasing_slope(p.g0, gamma, p.hbar);
    let (windowed, _, _) = finite_interval_slope(p, -s_cut, s_cut, tol, NumeratorMode::Closed)?;
    Ok(full - windowed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GammaProfile;
    use std::f64::consts::PI;

    /// Q(1) = pi (1/sqrt(2) - 1/2), from partial fractions of the defining
    /// integral: 1/((t^2+1)^2 (t^2+2)) = -1/(t^2+1) + 1/(t^2+1)^2 + 1/(t^2+2).
    const Q1: f64 = PI * (std::f64::consts::FRAC_1_SQRT_2 - 0.5);

    #[test]
    fn q_closed_values() {
        assert_eq!(q_closed(0.0), 0.0);
        assert!((q_closed(1.0) - Q1).abs() <= 1e-15);
        // Near the maximum quoted for the shape of Q.
        let v = q_closed(1.13693);
        assert!((0.6556..0.6559).contains(&v), "Q(1.13693) = {v}");
    }

    #[test]
    fn q_quadrature_cross_checks_closed_form() {
        for x in [0.0, 1.0, 10.0] {
            let by_quad = q_quadrature(x, 1e-11).unwrap();
            assert!(
                (by_quad - q_closed(x)).abs() <= 1e-9,
                "x = {x}: {by_quad} vs {}",
                q_closed(x)
            );
        }
    }

    #[test]
    fn q_maximum_location() {
        let (x, q) = q_max();
        assert!((x - 1.13693).abs() <= 1e-4, "x* = {x}");
        assert!((0.6556..0.6559).contains(&q));
    }

    #[test]
    fn q_derivative_changes_sign_once() {
        // Central differences with h = 1e-6 on a scan of [0, 10]: exactly one
        // sign change, at the quoted maximum.
        let h = 1e-6;
        let deriv = |x: f64| (q_closed(x + h) - q_closed(x - h)) / (2.0 * h);
        let mut changes = Vec::new();
        let n = 2000;
        let mut prev = deriv(0.01);
        for i in 1..=n {
            let x = 0.01 + (10.0 - 0.01) * i as f64 / n as f64;
            let d = deriv(x);
            if d.signum() != prev.signum() {
                changes.push(x);
            }
            prev = d;
        }
        assert_eq!(changes.len(), 1, "sign changes at {changes:?}");
        // Bisect the bracket down to the root.
        let (mut lo, mut hi) = (changes[0] - (10.0 - 0.01) / n as f64, changes[0]);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if deriv(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        assert!((root - 1.13693).abs() <= 1e-4, "root = {root}");
    }

    #[test]
    fn asymptotic_regimes() {
        assert!((q_closed(0.01) / asymptotic_weak(0.01) - 1.0).abs() <= 1e-3);
        assert!((q_closed(100.0) / asymptotic_strong(100.0) - 1.0).abs() <= 1e-3);
        // Linear form is exact.
        assert_eq!(asymptotic_weak(1.0), 0.375 * PI);
        assert_eq!(asymptotic_weak(2.0) / 2.0, 0.375 * PI);
    }

    #[test]
    fn lz_values() {
        assert_eq!(lz_probability(0.0, 1.0, 1.0), 1.0);
        assert!((lz_probability(1.0, 1.0, 1.0) - (-PI / 2.0).exp()).abs() <= 1e-16);
        assert!((lz_probability(1.0, PI / 2.0, 1.0) - (-1.0f64).exp()).abs() <= 1e-16);
    }

    #[test]
    fn dephasing_closed_form() {
        assert_eq!(dephasing_tunneling(1.0, 0.0, 0.01, 1.0), 0.0);
        let t = dephasing_tunneling(1.0, 1.0, 0.01, 1.0);
        assert!((t - 0.005 * Q1).abs() <= 1e-15);
        let t2 = dephasing_tunneling(2.0, 1.0, 0.01, 1.0);
        assert!((t2 - 0.01 / 8.0 * q_closed(0.5)).abs() <= 1e-15);
    }

    #[test]
    fn q_cross_oracle_over_decades() {
        for k in -3..=2 {
            let x = 10f64.powi(k);
            let diff = (q_closed(x) - q_quadrature(x, 1e-11).unwrap()).abs();
            assert!(diff <= 1e-9, "x = {x}: diff = {diff:.3e}");
        }
    }

    #[test]
    fn finite_interval_zero_rate_vanishes() {
        let p = ModelParams::constant(1.0, 0.0, 1.0).unwrap();
        let r = finite_interval_tunneling(&p, 0.01, -10.0, 10.0, 1e-11, NumeratorMode::Closed).unwrap();
        assert_eq!(r.t, 0.0);
    }

    #[test]
    fn finite_interval_reaches_closed_form_on_wide_window() {
        // Integrand tail is O(s^-6); +-200 g0 leaves well under 1e-6 relative.
        let p = ModelParams::constant(1.0, 1.0, 1.0).unwrap();
        let eps = 0.01;
        let wide = finite_interval_tunneling(&p, eps, -200.0, 200.0, 1e-12, NumeratorMode::Closed)
            .unwrap()
            .t;
        let closed = dephasing_tunneling(1.0, 1.0, eps, 1.0);
        assert!(
            ((wide - closed) / closed).abs() <= 1e-6,
            "windowed {wide:.12e} vs closed {closed:.12e}"
        );
    }

    #[test]
    fn numerator_modes_agree() {
        let p = ModelParams::constant(1.3, 0.7, 1.0).unwrap();
        let a = finite_interval_slope(&p, -15.0, 15.0, 1e-12, NumeratorMode::Closed).unwrap().0;
        let b = finite_interval_slope(&p, -15.0, 15.0, 1e-12, NumeratorMode::Numeric).unwrap().0;
        assert!(((a - b) / a).abs() <= 1e-12);
    }

    #[test]
    fn finite_interval_piecewise_profile_matches_simpson_oracle() {
        // Triangle rate profile; oracle is an independent fixed-grid
        // composite Simpson rule with nodes on the breakpoints.
        let profile = GammaProfile::PiecewiseLinear(vec![(-10.0, 0.0), (0.0, 2.0), (10.0, 0.0)]);
        let p = ModelParams::new(1.0, profile, 1.0).unwrap();
        let eps = 0.01;
        let r = finite_interval_tunneling(&p, eps, -10.0, 10.0, 1e-12, NumeratorMode::Closed).unwrap();

        let n = 200_000; // even; node lands on the s = 0 kink
        let h = 20.0 / n as f64;
        let f = |s: f64| {
            let gamma_eff = p.gamma_eff(s);
            let g2 = s * s + 1.0;
            gamma_eff * (1.0 / (4.0 * g2 * g2)) / (g2 + gamma_eff * gamma_eff)
        };
        let mut acc = f(-10.0) + f(10.0);
        for i in 1..n {
            let s = -10.0 + i as f64 * h;
            acc += f(s) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let oracle = 2.0 * eps * acc * h / 3.0;
        assert!((r.t - oracle).abs() <= 1e-8, "{} vs {}", r.t, oracle);
    }

    #[test]
    fn finite_interval_monotone_in_upper_limit() {
        let p = ModelParams::constant(1.0, 1.0, 1.0).unwrap();
        let mut prev = 0.0;
        for s1 in [-5.0, -1.0, 0.0, 2.0, 8.0, 20.0] {
            let t = finite_interval_tunneling(&p, 0.01, -10.0, s1, 1e-11, NumeratorMode::Closed)
                .unwrap()
                .t;
            assert!(t >= prev, "T not monotone at s1 = {s1}");
            prev = t;
        }
    }

    #[test]
    fn tail_estimate_is_positive_and_small() {
        let p = ModelParams::constant(1.0, 1.0, 1.0).unwrap();
        let tail = slope_tail_estimate(&p, 20.0, 1e-12).unwrap();
        assert!(tail > 0.0);
        assert!(tail < 1e-6 * dephasing_slope(1.0, 1.0, 1.0));
    }
}
