//! Verification drivers tying the master-equation dynamics to the analytic
//! layer: tunneling measurement, slope extrapolation in the adiabatic
//! parameter, the adiabatic-invariant identity, residual scaling, and
//! norm-contraction checks.

use crate::error::Error;
use crate::formulas::{Method, TunnelingResult};
use crate::linalg2::{mat_of, vec_of, C64, Mat2};
use crate::lindblad::{apply_l_with, transport_x, transport_x_dot, TransportKind};
use crate::model::{spectral, ModelParams};
use crate::odeint::{integrate, IntegratorConfig, Trajectory};

/// One master-equation run: model, adiabatic parameter, window, integrator
/// settings and how many equally spaced samples to retain.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub params: ModelParams,
    pub eps: f64,
    pub s0: f64,
    pub s1: f64,
    pub cfg: IntegratorConfig,
    pub sample_count: usize,
}

impl RunSpec {
    pub fn new(params: ModelParams, eps: f64, s0: f64, s1: f64) -> Result<Self, Error> {
        let spec = RunSpec {
            params,
            eps,
            s0,
            s1,
            cfg: IntegratorConfig::default(),
            sample_count: 2001,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_cfg(mut self, cfg: IntegratorConfig) -> Self {
        self.cfg = cfg;
        self
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.sample_count = n;
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.eps > 0.0) {
            return Err(Error::invalid("eps", format!("{} must be > 0", self.eps)));
        }
        if !(self.s0 <= self.s1) {
            return Err(Error::invalid(
                "window",
                format!("need s0 <= s1, got [{}, {}]", self.s0, self.s1),
            ));
        }
        if self.sample_count < 2 {
            return Err(Error::invalid("samples", "need at least 2 retained samples"));
        }
        self.cfg.validate()
    }
}

/// Retained density-matrix samples of one run.
#[derive(Debug, Clone)]
pub struct RhoTrajectory {
    pub samples: Vec<(f64, Mat2)>,
    pub accepted: u64,
    pub rejected: u64,
    pub rhs_evals: u64,
}

impl RhoTrajectory {
    pub fn final_rho(&self) -> &Mat2 {
        &self.samples.last().expect("nonempty trajectory").1
    }

    /// `tr(rho P+)` at sample `i`, with the instantaneous projection.
    pub fn population_plus(&self, i: usize, p: &ModelParams) -> f64 {
        let (s, rho) = &self.samples[i];
        (spectral(*s, p).p_plus.mat() * *rho).trace().re
    }

    /// HS norm of the block of `rho` off-diagonal in the instantaneous
    /// eigenbasis at sample `i`.
    pub fn offdiag_norm(&self, i: usize, p: &ModelParams) -> f64 {
        let (s, rho) = &self.samples[i];
        let sd = spectral(*s, p);
        let pp = sd.p_plus.mat();
        let pm = sd.p_minus.mat();
        (pm * *rho * pp + pp * *rho * pm).hs_norm()
    }
}

fn rho_trajectory(traj: Trajectory) -> RhoTrajectory {
    RhoTrajectory {
        samples: traj
            .samples
            .into_iter()
            .map(|(s, v)| (s, mat_of(&v)))
            .collect(),
        accepted: traj.accepted,
        rejected: traj.rejected,
        rhs_evals: traj.rhs_evals,
    }
}

/// Integrate `d rho / ds = L_s(rho) / (hbar eps)` on the vectorized state
/// without any state-quality validation. A zero-length window yields the
/// single-sample trivial trajectory.
pub fn evolve_raw(spec: &RunSpec, rho0: &Mat2) -> Result<RhoTrajectory, Error> {
    spec.validate()?;
    if spec.s0 == spec.s1 {
        return Ok(RhoTrajectory {
            samples: vec![(spec.s0, *rho0)],
            accepted: 0,
            rejected: 0,
            rhs_evals: 0,
        });
    }
    let p = spec.params.clone();
    let inv_eps = 1.0 / p.eps_eff(spec.eps);
    let rhs = move |s: f64, y: &[C64], dy: &mut [C64]| {
        let sd = spectral(s, &p);
        let rho = mat_of(y);
        let l = apply_l_with(&sd, &rho, p.gamma_eff(s), &p);
        let v = vec_of(&(l * C64::new(inv_eps, 0.0)));
        dy.copy_from_slice(&v);
    };
    let y0 = vec_of(rho0);
    let traj = integrate(rhs, &y0, spec.s0, spec.s1, &spec.cfg, spec.sample_count)?;
    Ok(rho_trajectory(traj))
}

const TRACE_TOL: f64 = 1e-9;
const HERM_TOL: f64 = 1e-9;
const EIG_FLOOR: f64 = -1e-8;

/// Evolve a density matrix (default initial state: the instantaneous lower
/// projection `P-(s0)`). Every retained sample must stay a density matrix to
/// within tight bounds: unit trace to 1e-9, Hermiticity defect below 1e-9,
/// smallest eigenvalue above -1e-8.
pub fn evolve_rho(spec: &RunSpec, rho0: Option<&Mat2>) -> Result<RhoTrajectory, Error> {
    let default_rho0 = spectral(spec.s0, &spec.params).p_minus.mat();
    let rho0 = rho0.copied().unwrap_or(default_rho0);
    let traj = evolve_raw(spec, &rho0)?;
    for (s, rho) in &traj.samples {
        let trace_err = (rho.trace() - C64::new(1.0, 0.0)).norm();
        if trace_err > TRACE_TOL {
            return Err(Error::StateQuality {
                s: *s,
                what: "trace deviation",
                value: trace_err,
                bound: TRACE_TOL,
            });
        }
        let defect = rho.hermiticity_defect();
        if defect > HERM_TOL {
            return Err(Error::StateQuality {
                s: *s,
                what: "hermiticity defect",
                value: defect,
                bound: HERM_TOL,
            });
        }
        let (min_eig, _) = rho.herm_eigenvalues();
        if min_eig < EIG_FLOOR {
            return Err(Error::StateQuality {
                s: *s,
                what: "negative eigenvalue",
                value: min_eig,
                bound: EIG_FLOOR,
            });
        }
    }
    Ok(traj)
}

/// Tunneling probability `T = tr(rho(s1) P+(s1))` for a state started in
/// `P-(s0)`.
pub fn measure_tunneling(spec: &RunSpec) -> Result<(TunnelingResult, RhoTrajectory), Error> {
    let traj = evolve_rho(spec, None)?;
    let t = traj.population_plus(traj.samples.len() - 1, &spec.params);
    Ok((
        TunnelingResult {
            t,
            method: Method::Ode,
            tolerance_achieved: spec.cfg.rel_tol,
            evals: traj.rhs_evals,
            accepted_steps: traj.accepted,
            rejected_steps: traj.rejected,
        },
        traj,
    ))
}

/// Least-squares fit `T = a*eps + b*eps^2` through the origin. Returns
/// `(a, b)`; needs at least two distinct `eps` values.
pub fn slope_extrapolate(points: &[(f64, f64)]) -> Result<(f64, f64), Error> {
    let mut distinct: Vec<f64> = Vec::new();
    for (eps, _) in points {
        if !distinct.iter().any(|e| e == eps) {
            distinct.push(*eps);
        }
    }
    if distinct.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: distinct.len(),
        });
    }
    // Normal equations for the basis {eps, eps^2}.
    let (mut s2, mut s3, mut s4, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(eps, t) in points {
        let e2 = eps * eps;
        s2 += e2;
        s3 += e2 * eps;
        s4 += e2 * e2;
        r1 += eps * t;
        r2 += e2 * t;
    }
    let det = s2 * s4 - s3 * s3;
    if det.abs() <= 1e-300 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: distinct.len(),
        });
    }
    Ok(((s4 * r1 - s3 * r2) / det, (s2 * r2 - s3 * r1) / det))
}

/// Which spectral projection plays the observable in the invariant identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    PPlus,
    PMinus,
}

/// Both sides of the adiabatic-invariant identity
/// `tr(A rho)|_{s0}^{s1} = eps tr(X rho)|_{s0}^{s1} - eps int tr(dX/ds rho) ds`
/// evaluated on one run, with the per-term breakdown.
#[derive(Debug, Clone)]
pub struct InvariantReport {
    pub lhs: f64,
    pub rhs: f64,
    pub boundary_term: f64,
    pub integral_term: f64,
    pub residual: f64,
}

/// Evaluate the invariant identity for `A = P+(s)` (or `P-`). The transport
/// solution comes from the closed form; its derivative from Richardson-refined
/// central differences; the integral from Simpson weights on the retained
/// samples (which therefore must be odd in number).
pub fn verify_invariant_identity(spec: &RunSpec, which: Observable) -> Result<InvariantReport, Error> {
    let traj = evolve_rho(spec, None)?;
    if spec.s0 == spec.s1 {
        return Ok(InvariantReport {
            lhs: 0.0,
            rhs: 0.0,
            boundary_term: 0.0,
            integral_term: 0.0,
            residual: 0.0,
        });
    }
    let n = traj.samples.len();
    if n < 3 || n % 2 == 0 {
        return Err(Error::invalid(
            "samples",
            format!("invariant integral needs an odd sample count >= 3, got {n}"),
        ));
    }
    let p = &spec.params;
    let eps_eff = p.eps_eff(spec.eps);
    let sign = match which {
        Observable::PPlus => 1.0,
        Observable::PMinus => -1.0,
    };

    let obs = |s: f64| -> Mat2 {
        let sd = spectral(s, p);
        match which {
            Observable::PPlus => sd.p_plus.mat(),
            Observable::PMinus => sd.p_minus.mat(),
        }
    };
    // dA/ds = sign * dP+/ds, so X(A) = sign * X(P+).
    let x_at = |s: f64| -> Result<Mat2, Error> {
        Ok(transport_x(s, p, TransportKind::Plus)?.scale(sign))
    };
    let xdot_at = |s: f64| -> Result<Mat2, Error> {
        Ok(transport_x_dot(s, p, TransportKind::Plus)?.scale(sign))
    };

    let (s_first, rho_first) = &traj.samples[0];
    let (s_last, rho_last) = &traj.samples[n - 1];

    let lhs = (obs(*s_last) * *rho_last).trace().re - (obs(*s_first) * *rho_first).trace().re;

    let boundary_term = eps_eff
        * ((x_at(*s_last)? * *rho_last).trace().re - (x_at(*s_first)? * *rho_first).trace().re);

    // Simpson weights h/3 * (1, 4, 2, ..., 2, 4, 1) on the uniform grid.
    let h = (spec.s1 - spec.s0) / (n - 1) as f64;
    let mut acc = 0.0;
    for (i, (s, rho)) in traj.samples.iter().enumerate() {
        let w = if i == 0 || i == n - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * (xdot_at(*s)? * *rho).trace().re;
    }
    let integral_term = eps_eff * acc * h / 3.0;

    let rhs = boundary_term - integral_term;
    Ok(InvariantReport {
        lhs,
        rhs,
        boundary_term,
        integral_term,
        residual: (lhs - rhs).abs(),
    })
}

/// Max over retained samples of `|| rho(s) - P-(s) ||_HS` for a state started
/// in `P-(s0)`; the quantity whose scaling in `eps` the adiabatic theorem
/// controls.
pub fn adiabatic_residual(spec: &RunSpec) -> Result<f64, Error> {
    let traj = evolve_rho(spec, None)?;
    let mut worst = 0.0f64;
    for (s, rho) in &traj.samples {
        let pm = spectral(*s, &spec.params).p_minus.mat();
        worst = worst.max((*rho - pm).hs_norm());
    }
    Ok(worst)
}

/// HS norms along a run started from an arbitrary Hermitian matrix, and the
/// largest increase between consecutive retained samples. Dissipativity makes
/// the norm nonincreasing; `max_increase` should sit within numerical slack.
#[derive(Debug, Clone)]
pub struct ContractionReport {
    pub norms: Vec<(f64, f64)>,
    pub max_increase: f64,
    pub initial_norm: f64,
    pub final_norm: f64,
}

pub const CONTRACTION_SLACK: f64 = 1e-9;

impl ContractionReport {
    pub fn monotone_within_slack(&self) -> bool {
        self.max_increase <= CONTRACTION_SLACK
    }
}

/// Evolve a Hermitian (not necessarily positive) matrix and report the HS
/// norm along the trajectory.
pub fn contraction_check(spec: &RunSpec, rho0: &Mat2) -> Result<ContractionReport, Error> {
    if rho0.hermiticity_defect() > 1e-12 {
        return Err(Error::invalid("rho0", "must be Hermitian"));
    }
    let traj = evolve_raw(spec, rho0)?;
    let norms: Vec<(f64, f64)> = traj.samples.iter().map(|(s, m)| (*s, m.hs_norm())).collect();
    let mut max_increase = 0.0f64;
    for w in norms.windows(2) {
        max_increase = max_increase.max(w[1].1 - w[0].1);
    }
    Ok(ContractionReport {
        max_increase,
        initial_norm: norms.first().map(|x| x.1).unwrap_or(0.0),
        final_norm: norms.last().map(|x| x.1).unwrap_or(0.0),
        norms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::dephasing_tunneling;

    fn quick_cfg() -> IntegratorConfig {
        IntegratorConfig::with_tols(1e-10, 1e-12)
    }

    fn spec(g0: f64, gamma: f64, eps: f64, s0: f64, s1: f64) -> RunSpec {
        RunSpec::new(ModelParams::constant(g0, gamma, 1.0).unwrap(), eps, s0, s1)
            .unwrap()
            .with_cfg(quick_cfg())
    }

    #[test]
    fn zero_length_window_is_trivial() {
        let sp = spec(1.0, 1.0, 0.01, 2.0, 2.0);
        let traj = evolve_rho(&sp, None).unwrap();
        assert_eq!(traj.samples.len(), 1);
        let pm = spectral(2.0, &sp.params).p_minus.mat();
        assert!((*traj.final_rho() - pm).hs_norm() == 0.0);
        assert_eq!(adiabatic_residual(&sp).unwrap(), 0.0);
    }

    #[test]
    fn state_quality_rejects_nonpositive_initial_state() {
        let sp = spec(1.0, 1.0, 0.05, -1.0, 1.0).with_samples(51);
        let bad = Mat2::from_real(2.0, 0.0, 0.0, -1.0); // trace 1, not psd
        match evolve_rho(&sp, Some(&bad)) {
            Err(Error::StateQuality { what, .. }) => assert_eq!(what, "negative eigenvalue"),
            other => panic!("expected state-quality error, got {other:?}"),
        }
    }

    #[test]
    fn slope_fit_recovers_exact_linear_data() {
        let pts: Vec<(f64, f64)> = [0.01, 0.02, 0.04].iter().map(|&e| (e, 3.0 * e)).collect();
        let (a, b) = slope_extrapolate(&pts).unwrap();
        assert!((a - 3.0).abs() <= 1e-12);
        assert!(b.abs() <= 1e-9);
    }

    #[test]
    fn slope_fit_recovers_quadratic_data() {
        let pts: Vec<(f64, f64)> = [0.01, 0.03].iter().map(|&e| (e, e + e * e)).collect();
        let (a, b) = slope_extrapolate(&pts).unwrap();
        assert!((a - 1.0).abs() <= 1e-10);
        assert!((b - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn slope_fit_on_closed_form_data_is_linear() {
        let pts: Vec<(f64, f64)> = [0.04, 0.02, 0.01]
            .iter()
            .map(|&e| (e, dephasing_tunneling(1.0, 1.0, e, 1.0)))
            .collect();
        let (a, b) = slope_extrapolate(&pts).unwrap();
        let expect = dephasing_tunneling(1.0, 1.0, 1.0, 1.0);
        assert!((a - expect).abs() <= 1e-12 * expect.abs().max(1.0));
        assert!(b.abs() <= 1e-9);
    }

    #[test]
    fn slope_fit_needs_two_distinct_eps() {
        assert!(slope_extrapolate(&[(0.01, 1.0)]).is_err());
        assert!(slope_extrapolate(&[(0.01, 1.0), (0.01, 2.0)]).is_err());
    }

    #[test]
    fn invariant_identity_holds_on_small_window() {
        let sp = spec(1.0, 1.0, 0.05, -5.0, 5.0).with_samples(2001);
        let report = verify_invariant_identity(&sp, Observable::PPlus).unwrap();
        assert!(
            report.residual <= 1e-6 * report.lhs.abs().max(sp.eps),
            "residual {:.3e}, lhs {:.3e}",
            report.residual,
            report.lhs
        );
    }

    #[test]
    fn invariant_identity_antisymmetric_between_projections() {
        let sp = spec(1.0, 1.0, 0.05, -5.0, 5.0).with_samples(501);
        let plus = verify_invariant_identity(&sp, Observable::PPlus).unwrap();
        let minus = verify_invariant_identity(&sp, Observable::PMinus).unwrap();
        assert!(
            (plus.lhs + minus.lhs).abs() <= 1e-10,
            "lhs+ = {:.3e}, lhs- = {:.3e}",
            plus.lhs,
            minus.lhs
        );
    }

    #[test]
    fn invariant_identity_requires_odd_samples() {
        let sp = spec(1.0, 1.0, 0.05, -1.0, 1.0).with_samples(100);
        assert!(verify_invariant_identity(&sp, Observable::PPlus).is_err());
    }

    #[test]
    fn contraction_from_projection_state() {
        let sp = spec(1.0, 1.0, 0.05, -2.0, 2.0).with_samples(201);
        let rho0 = spectral(-2.0, &sp.params).p_minus.mat();
        let report = contraction_check(&sp, &rho0).unwrap();
        assert!(report.monotone_within_slack());
        for (_, n) in &report.norms {
            assert!(*n <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn contraction_strict_decrease_through_crossing() {
        // sigma_x/sqrt(2) is purely off-diagonal at the crossing; dephasing
        // bites and the norm drops strictly.
        let sp = spec(1.0, 1.0, 0.05, -2.0, 2.0).with_samples(201);
        let rho0 = Mat2::sigma_x().scale(1.0 / 2.0_f64.sqrt());
        let report = contraction_check(&sp, &rho0).unwrap();
        assert!(report.monotone_within_slack());
        assert!(report.final_norm < report.initial_norm - 1e-3);
    }

    #[test]
    fn contraction_unitary_case_preserves_norm() {
        // The 1e-9 bound needs the integrator's own norm drift well below it.
        let sp = spec(1.0, 0.0, 0.05, -2.0, 2.0)
            .with_cfg(IntegratorConfig::with_tols(1e-12, 1e-14))
            .with_samples(201);
        let rho0 = Mat2::sigma_x().scale(1.0 / 2.0_f64.sqrt());
        let report = contraction_check(&sp, &rho0).unwrap();
        for (_, n) in &report.norms {
            assert!((n - report.initial_norm).abs() <= 1e-9);
        }
    }

    #[test]
    fn contraction_rejects_non_hermitian_seed() {
        let sp = spec(1.0, 1.0, 0.05, -1.0, 1.0);
        let bad = Mat2::from_real(0.0, 1.0, 0.0, 0.0);
        assert!(contraction_check(&sp, &bad).is_err());
    }

    #[test]
    fn runspec_validation() {
        let p = ModelParams::constant(1.0, 1.0, 1.0).unwrap();
        assert!(RunSpec::new(p.clone(), 0.0, -1.0, 1.0).is_err());
        assert!(RunSpec::new(p.clone(), 0.1, 1.0, -1.0).is_err());
        assert!(RunSpec::new(p, 0.1, -1.0, 1.0).is_ok());
    }
}
