//! The two-level avoided-crossing model: `H(s) = [[s, g0], [g0, -s]] / 2`,
//! its gap, spectral projections with closed-form s-derivatives, and the
//! dephasing-rate profile `gamma(s)`.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg2::HermMat2;

/// Dephasing rate as a function of slow time. Piecewise-linear profiles clamp
/// to their end values outside the breakpoint range, which keeps the rate
/// nonnegative everywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GammaProfile {
    Constant(f64),
    PiecewiseLinear(Vec<(f64, f64)>),
}

impl GammaProfile {
    pub fn validate(&self) -> Result<(), Error> {
        match self {
            GammaProfile::Constant(v) => {
                if !v.is_finite() || *v < 0.0 {
                    return Err(Error::invalid("gamma", format!("rate {v} must be >= 0")));
                }
            }
            GammaProfile::PiecewiseLinear(pts) => {
                if pts.is_empty() {
                    return Err(Error::invalid("gamma", "breakpoint table is empty"));
                }
                for w in pts.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(Error::invalid(
                            "gamma",
                            format!("breakpoints must be strictly increasing ({} then {})", w[0].0, w[1].0),
                        ));
                    }
                }
                for (s, v) in pts {
                    if !s.is_finite() || !v.is_finite() || *v < 0.0 {
                        return Err(Error::invalid("gamma", format!("value {v} at s = {s} must be >= 0")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Largest rate the profile attains (used for default window sizing).
    pub fn max_value(&self) -> f64 {
        match self {
            GammaProfile::Constant(v) => *v,
            GammaProfile::PiecewiseLinear(pts) => pts.iter().map(|p| p.1).fold(0.0, f64::max),
        }
    }

    /// The constant rate, if the profile is constant.
    pub fn constant_value(&self) -> Option<f64> {
        match self {
            GammaProfile::Constant(v) => Some(*v),
            GammaProfile::PiecewiseLinear(_) => None,
        }
    }
}

/// Rate at slow time `s`. Linear interpolation inside the table, clamped to
/// the end values outside it.
pub fn gamma_at(s: f64, prof: &GammaProfile) -> f64 {
    match prof {
        GammaProfile::Constant(v) => *v,
        GammaProfile::PiecewiseLinear(pts) => {
            let first = pts[0];
            let last = pts[pts.len() - 1];
            if s <= first.0 {
                return first.1;
            }
            if s >= last.0 {
                return last.1;
            }
            let idx = pts.partition_point(|p| p.0 <= s);
            let (s0, v0) = pts[idx - 1];
            let (s1, v1) = pts[idx];
            v0 + (v1 - v0) * (s - s0) / (s1 - s0)
        }
    }
}

/// Physical model: minimal gap, dephasing profile and hbar.
///
/// Internally everything runs in hbar = 1 units; [`ModelParams::gamma_eff`]
/// and [`ModelParams::eps_eff`] perform the rescaling `gamma -> hbar*gamma`,
/// `eps -> hbar*eps` at the boundary so each formula is implemented once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub g0: f64,
    pub gamma: GammaProfile,
    pub hbar: f64,
}

impl ModelParams {
    pub fn new(g0: f64, gamma: GammaProfile, hbar: f64) -> Result<Self, Error> {
        if !g0.is_finite() || g0 <= 0.0 {
            return Err(Error::invalid("g0", format!("{g0} must be > 0")));
        }
        if !hbar.is_finite() || hbar <= 0.0 {
            return Err(Error::invalid("hbar", format!("{hbar} must be > 0")));
        }
        gamma.validate()?;
        Ok(ModelParams { g0, gamma, hbar })
    }

    pub fn constant(g0: f64, gamma: f64, hbar: f64) -> Result<Self, Error> {
        ModelParams::new(g0, GammaProfile::Constant(gamma), hbar)
    }

    /// `hbar * gamma(s)`, the rate entering every hbar = 1 expression.
    pub fn gamma_eff(&self, s: f64) -> f64 {
        self.hbar * gamma_at(s, &self.gamma)
    }

    /// `hbar * eps`.
    pub fn eps_eff(&self, eps: f64) -> f64 {
        self.hbar * eps
    }

    /// Default finite window standing in for the real line:
    /// `S = 20 * max(g0, hbar*gamma_max)`.
    pub fn default_window(&self) -> (f64, f64) {
        let scale = self.g0.max(self.hbar * self.gamma.max_value());
        (-20.0 * scale, 20.0 * scale)
    }
}

/// Instantaneous gap `g(s) = sqrt(s^2 + g0^2)`.
pub fn gap(s: f64, p: &ModelParams) -> f64 {
    s.hypot(p.g0)
}

/// `H(s) = [[s, g0], [g0, -s]] / 2`.
pub fn hamiltonian(s: f64, p: &ModelParams) -> HermMat2 {
    HermMat2::from_pauli(0.0, 0.5 * p.g0, 0.0, 0.5 * s)
}

/// Spectral data of `H(s)`: eigenvalues `±g/2`, the Bloch-form projections
/// `P± = (I ± (s*sz + g0*sx)/g)/2` and their closed-form s-derivatives
/// `dP+/ds = (g0/2g^3)(g0*sz - s*sx)`, `dP-/ds = -dP+/ds`.
#[derive(Debug, Clone, Copy)]
pub struct SpectralData {
    pub s: f64,
    pub g: f64,
    pub e_minus: f64,
    pub e_plus: f64,
    pub p_minus: HermMat2,
    pub p_plus: HermMat2,
    pub dp_minus: HermMat2,
    pub dp_plus: HermMat2,
}

/// Projections computed from the Bloch closed form rather than an
/// eigensolver, so they are smooth in `s` with no sign flips;
/// [`crate::linalg2::eig_herm2`] serves only as a cross-check.
pub fn spectral(s: f64, p: &ModelParams) -> SpectralData {
    let g = gap(s, p);
    let nx = p.g0 / g;
    let nz = s / g;
    let c = p.g0 / (2.0 * g * g * g);
    SpectralData {
        s,
        g,
        e_minus: -0.5 * g,
        e_plus: 0.5 * g,
        p_minus: HermMat2::from_pauli(0.5, -0.5 * nx, 0.0, -0.5 * nz),
        p_plus: HermMat2::from_pauli(0.5, 0.5 * nx, 0.0, 0.5 * nz),
        dp_minus: HermMat2::from_pauli(0.0, c * s, 0.0, -c * p.g0),
        dp_plus: HermMat2::from_pauli(0.0, -c * s, 0.0, c * p.g0),
    }
}

/// `tr(P+ dP-^2 P+)` computed from the spectral matrices; equals
/// `g0^2 / (4 g^4)` in closed form.
pub fn tunneling_numerator_numeric(sd: &SpectralData) -> f64 {
    let dpm = sd.dp_minus.mat();
    let pp = sd.p_plus.mat();
    (pp * dpm * dpm * pp).trace().re
}

/// Closed form `g0^2 / (4 g^4)` of the tunneling numerator.
pub fn tunneling_numerator_closed(s: f64, p: &ModelParams) -> f64 {
    let g2 = s * s + p.g0 * p.g0;
    p.g0 * p.g0 / (4.0 * g2 * g2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg2::{eig_herm2, Mat2};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn params(g0: f64) -> ModelParams {
        ModelParams::constant(g0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn hamiltonian_matches_definition() {
        let h = hamiltonian(0.0, &params(1.0));
        assert!((h.mat() - Mat2::sigma_x().scale(0.5)).hs_norm() == 0.0);

        let h2 = hamiltonian(2.0, &params(1.0));
        assert!((h2.mat() - Mat2::from_real(1.0, 0.5, 0.5, -1.0)).hs_norm() == 0.0);

        // Traceless with off-diagonal g0/2 at the crossing.
        let h3 = hamiltonian(0.0, &params(3.0));
        assert_eq!(h3.mat().trace().norm(), 0.0);
        assert_eq!(h3.mat().0[1].re, 1.5);
    }

    #[test]
    fn gap_values() {
        assert_eq!(gap(0.0, &params(1.0)), 1.0);
        assert!((gap(1.0, &params(1.0)) - 2.0_f64.sqrt()).abs() <= 1e-16);
        assert_eq!(gap(3.0, &params(4.0)), 5.0);
    }

    #[test]
    fn spectral_at_crossing() {
        let p = params(1.0);
        let sd = spectral(0.0, &p);
        let half = 0.5;
        assert!((sd.p_plus.mat() - (Mat2::identity() + Mat2::sigma_x()).scale(half)).hs_norm() <= 1e-15);
        assert!((sd.p_minus.mat() - (Mat2::identity() - Mat2::sigma_x()).scale(half)).hs_norm() <= 1e-15);
        // dP+/ds at s=0 is sz/(2 g0).
        assert!((sd.dp_plus.mat() - Mat2::sigma_z().scale(0.5)).hs_norm() <= 1e-15);
    }

    #[test]
    fn spectral_at_s_equals_g0() {
        // Unit Bloch vector (1, 0, 1)/sqrt(2).
        let p = params(1.0);
        let sd = spectral(1.0, &p);
        let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
        let expect = (Mat2::identity()
            + (Mat2::sigma_z() + Mat2::sigma_x()).scale(inv_sqrt2))
        .scale(0.5);
        assert!((sd.p_plus.mat() - expect).hs_norm() <= 1e-15);
    }

    #[test]
    fn spectral_eigen_relation_and_projector_sum() {
        let p = params(1.3);
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..1000 {
            let s = rng.gen_range(-50.0..50.0);
            let sd = spectral(s, &p);
            let h = hamiltonian(s, &p).mat();
            assert!((h * sd.p_plus.mat() - sd.p_plus.mat().scale(sd.e_plus)).hs_norm() <= 1e-12);
            assert!((h * sd.p_minus.mat() - sd.p_minus.mat().scale(sd.e_minus)).hs_norm() <= 1e-12);
            assert!((sd.p_plus.mat() + sd.p_minus.mat() - Mat2::identity()).hs_norm() <= 1e-13);
            assert!((sd.dp_plus.mat() + sd.dp_minus.mat()).hs_norm() <= 1e-13);
        }
    }

    #[test]
    fn spectral_agrees_with_eigensolver() {
        let p = params(0.8);
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..1000 {
            let s = rng.gen_range(-50.0..50.0);
            let sd = spectral(s, &p);
            let e = eig_herm2(&hamiltonian(s, &p)).unwrap();
            assert!((sd.e_plus - e.e_plus).abs() <= 1e-12 * sd.g.max(1.0));
            assert!((sd.p_plus.mat() - e.p_plus.mat()).hs_norm() <= 1e-12);
            assert!((sd.p_minus.mat() - e.p_minus.mat()).hs_norm() <= 1e-12);
        }
    }

    #[test]
    fn projection_derivative_matches_finite_differences() {
        let p = params(1.0);
        let h = 1e-4;
        for &s in &[-7.3, -1.0, 0.0, 0.4, 2.0, 19.0] {
            let sd = spectral(s, &p);
            let fd = (spectral(s + h, &p).p_plus.mat() - spectral(s - h, &p).p_plus.mat())
                .scale(1.0 / (2.0 * h));
            let err = (fd - sd.dp_plus.mat()).hs_norm();
            assert!(err <= 10.0 * h * h, "s = {s}: err = {err:.3e}");
        }
    }

    #[test]
    fn tunneling_numerator_identity() {
        let p = params(1.7);
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..1000 {
            let s = rng.gen_range(-30.0..30.0);
            let sd = spectral(s, &p);
            let numeric = tunneling_numerator_numeric(&sd);
            let closed = tunneling_numerator_closed(s, &p);
            assert!((numeric - closed).abs() <= 1e-13);
        }
    }

    #[test]
    fn dp_plus_is_off_diagonal_in_eigenbasis() {
        // dP+ = P- dP+ P+ + P+ dP+ P-.
        let p = params(0.9);
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..1000 {
            let s = rng.gen_range(-30.0..30.0);
            let sd = spectral(s, &p);
            let dp = sd.dp_plus.mat();
            let pp = sd.p_plus.mat();
            let pm = sd.p_minus.mat();
            let rebuilt = pm * dp * pp + pp * dp * pm;
            assert!((dp - rebuilt).hs_norm() <= 1e-13);
        }
    }

    #[test]
    fn gamma_profile_lookup() {
        assert_eq!(gamma_at(7.0, &GammaProfile::Constant(1.0)), 1.0);

        let pwl = GammaProfile::PiecewiseLinear(vec![(0.0, 0.0), (1.0, 2.0)]);
        pwl.validate().unwrap();
        assert_eq!(gamma_at(0.5, &pwl), 1.0);
        assert_eq!(gamma_at(5.0, &pwl), 2.0);
        assert_eq!(gamma_at(-3.0, &pwl), 0.0);
    }

    #[test]
    fn gamma_profile_validation() {
        assert!(GammaProfile::Constant(-1.0).validate().is_err());
        assert!(GammaProfile::PiecewiseLinear(vec![]).validate().is_err());
        assert!(GammaProfile::PiecewiseLinear(vec![(0.0, 1.0), (0.0, 2.0)])
            .validate()
            .is_err());
        assert!(GammaProfile::PiecewiseLinear(vec![(0.0, 1.0), (1.0, -2.0)])
            .validate()
            .is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::constant(0.0, 1.0, 1.0).is_err());
        assert!(ModelParams::constant(1.0, 1.0, 0.0).is_err());
        assert!(ModelParams::constant(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn hbar_rescaling() {
        let p = ModelParams::constant(1.0, 2.0, 0.5).unwrap();
        assert_eq!(p.gamma_eff(0.0), 1.0);
        assert_eq!(p.eps_eff(0.01), 0.005);
        let (s0, s1) = p.default_window();
        assert_eq!((s0, s1), (-20.0, 20.0));
    }
}
