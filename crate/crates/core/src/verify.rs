//! Seeded property suites over randomized model instances: generator
//! structure (kernel, adjointness, dissipativity), parallel transport,
//! the adiabatic-invariant identity, norm contraction, and residual scaling.
//!
//! Each property reports its worst measured residual against a fixed bound,
//! so a run both checks and documents the margins.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::experiments::{
    adiabatic_residual, contraction_check, verify_invariant_identity, Observable, RunSpec,
    CONTRACTION_SLACK,
};
use crate::linalg2::{vec_of, C64, Mat2};
use crate::lindblad::{apply_l, apply_l_adj, superop_matrix, transport_x, TransportKind};
use crate::model::{
    spectral, tunneling_numerator_closed, tunneling_numerator_numeric, ModelParams,
};
use crate::odeint::IntegratorConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Kernel,
    Transport,
    Invariant,
    Contraction,
    Residual,
    All,
}

impl Suite {
    pub fn parse(name: &str) -> Option<Suite> {
        Some(match name {
            "kernel" => Suite::Kernel,
            "transport" => Suite::Transport,
            "invariant" => Suite::Invariant,
            "contraction" => Suite::Contraction,
            "residual" => Suite::Residual,
            "all" => Suite::All,
            _ => return None,
        })
    }
}

/// Outcome of one property: worst residual over all cases vs. its bound.
#[derive(Debug, Clone)]
pub struct PropertyResult {
    pub suite: &'static str,
    pub name: &'static str,
    pub cases: usize,
    pub max_residual: f64,
    pub bound: f64,
    pub passed: bool,
}

impl PropertyResult {
    fn check(suite: &'static str, name: &'static str, cases: usize, max_residual: f64, bound: f64) -> Self {
        PropertyResult {
            suite,
            name,
            cases,
            max_residual,
            bound,
            passed: max_residual <= bound,
        }
    }
}

pub const DEFAULT_CASES: usize = 1000;

fn random_hermitian(rng: &mut StdRng) -> Mat2 {
    Mat2::from_pauli(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    )
}

fn random_mat(rng: &mut StdRng) -> Mat2 {
    let c = |r: &mut StdRng| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
    Mat2([c(rng), c(rng), c(rng), c(rng)])
}

fn random_params(rng: &mut StdRng) -> ModelParams {
    ModelParams::constant(rng.gen_range(0.5..2.5), rng.gen_range(0.0..4.0), 1.0).unwrap()
}

fn random_s(rng: &mut StdRng) -> f64 {
    rng.gen_range(-10.0..10.0)
}

/// Structural facts about the generator itself.
pub fn kernel_suite(seed: u64, cases: usize) -> Vec<PropertyResult> {
    let mut rng = StdRng::seed_from_u64(seed);
    let suite = "kernel";

    let mut stationarity = 0.0f64;
    let mut kernel_combo = 0.0f64;
    let mut trace_ann = 0.0f64;
    let mut adjointness = 0.0f64;
    let mut dissipativity = f64::NEG_INFINITY;
    let mut dissipativity_im = 0.0f64;
    let mut superop_consistency = 0.0f64;
    let mut superop_trace_row = 0.0f64;
    let mut superop_spectrum = 0.0f64;

    for _ in 0..cases {
        let p = random_params(&mut rng);
        let s = random_s(&mut rng);
        let sd = spectral(s, &p);

        stationarity = stationarity
            .max(apply_l(s, &sd.p_plus.mat(), &p).hs_norm())
            .max(apply_l(s, &sd.p_minus.mat(), &p).hs_norm())
            .max(apply_l_adj(s, &sd.p_plus.mat(), &p).hs_norm());

        let a = rng.gen_range(-2.0..2.0);
        let b = rng.gen_range(-2.0..2.0);
        let combo = sd.p_minus.mat().scale(a) + sd.p_plus.mat().scale(b);
        kernel_combo = kernel_combo.max(apply_l(s, &combo, &p).hs_norm());

        let rho = random_hermitian(&mut rng);
        trace_ann = trace_ann.max(apply_l(s, &rho, &p).trace().norm());

        let obs = random_hermitian(&mut rng);
        let lhs = apply_l_adj(s, &obs, &p).hs_inner(&rho);
        let rhs = obs.hs_inner(&apply_l(s, &rho, &p));
        adjointness = adjointness.max((lhs - rhs).norm());

        let norm = rho.hs_norm();
        let unit = if norm > 0.0 { rho.scale(1.0 / norm) } else { rho };
        let diss = unit.hs_inner(&apply_l(s, &unit, &p));
        dissipativity = dissipativity.max(diss.re);
        dissipativity_im = dissipativity_im.max(diss.im.abs());

        let m = superop_matrix(s, &p);
        let x = random_mat(&mut rng);
        let via_matrix = m.apply(&vec_of(&x));
        let direct = vec_of(&apply_l(s, &x, &p));
        for k in 0..4 {
            superop_consistency = superop_consistency.max((via_matrix[k] - direct[k]).norm());
        }
        for j in 0..4 {
            superop_trace_row = superop_trace_row.max((m.0[0][j] + m.0[3][j]).norm());
        }

        // Spectrum {0, 0, -gamma - i g, -gamma + i g} on the analytic
        // eigenvectors.
        let gamma = p.gamma_eff(s);
        let eig_cases = [
            (sd.p_minus.mat(), C64::new(0.0, 0.0)),
            (sd.p_plus.mat(), C64::new(0.0, 0.0)),
            (sd.p_plus.mat() * x * sd.p_minus.mat(), C64::new(-gamma, -sd.g)),
            (sd.p_minus.mat() * x * sd.p_plus.mat(), C64::new(-gamma, sd.g)),
        ];
        for (mat, lambda) in &eig_cases {
            let v = vec_of(mat);
            let mv = m.apply(&v);
            for k in 0..4 {
                superop_spectrum = superop_spectrum.max((mv[k] - *lambda * v[k]).norm());
            }
        }
    }

    vec![
        PropertyResult::check(suite, "projection_stationarity", cases, stationarity, 1e-13),
        PropertyResult::check(suite, "kernel_span_annihilated", cases, kernel_combo, 1e-13),
        PropertyResult::check(suite, "trace_annihilation", cases, trace_ann, 1e-14),
        PropertyResult::check(suite, "hs_adjointness", cases, adjointness, 1e-12),
        PropertyResult::check(suite, "dissipativity_re", cases, dissipativity.max(0.0), 1e-14),
        PropertyResult::check(suite, "dissipativity_im", cases, dissipativity_im, 1e-14),
        PropertyResult::check(suite, "superop_consistency", cases, superop_consistency, 1e-13),
        PropertyResult::check(suite, "superop_trace_row", cases, superop_trace_row, 1e-14),
        PropertyResult::check(suite, "superop_spectrum", cases, superop_spectrum, 1e-13),
    ]
}

/// Parallel transport and the spectral identities feeding it.
pub fn transport_suite(seed: u64, cases: usize) -> Vec<PropertyResult> {
    let mut rng = StdRng::seed_from_u64(seed.wrapping_add(1));
    let suite = "transport";

    let mut numerator_identity = 0.0f64;
    let mut pid_identity = 0.0f64;
    let mut fd_projection = 0.0f64;
    let mut residual_plus = 0.0f64;
    let mut residual_minus = 0.0f64;
    let mut off_diagonality = 0.0f64;

    for _ in 0..cases {
        let p = random_params(&mut rng);
        let s = random_s(&mut rng);
        let sd = spectral(s, &p);

        numerator_identity = numerator_identity
            .max((tunneling_numerator_numeric(&sd) - tunneling_numerator_closed(s, &p)).abs());

        let dp = sd.dp_plus.mat();
        let pp = sd.p_plus.mat();
        let pm = sd.p_minus.mat();
        pid_identity = pid_identity.max((dp - (pm * dp * pp + pp * dp * pm)).hs_norm());

        let h = 1e-4;
        let fd = (spectral(s + h, &p).p_plus.mat() - spectral(s - h, &p).p_plus.mat())
            .scale(1.0 / (2.0 * h));
        fd_projection = fd_projection.max((fd - dp).hs_norm() / (h * h));

        let x = transport_x(s, &p, TransportKind::Plus).expect("nondegenerate gap");
        residual_plus = residual_plus.max((apply_l_adj(s, &x, &p) - dp).hs_norm());
        off_diagonality = off_diagonality
            .max((pp * x * pp).hs_norm())
            .max((pm * x * pm).hs_norm());

        let xm = transport_x(s, &p, TransportKind::Minus).expect("nondegenerate gap");
        residual_minus = residual_minus.max((apply_l(s, &xm, &p) - sd.dp_minus.mat()).hs_norm());
    }

    // Decay of the transport solution: O(s^-3) ratio check at two distances.
    let p = ModelParams::constant(1.0, 1.0, 1.0).unwrap();
    let x10 = transport_x(10.0, &p, TransportKind::Plus).unwrap().hs_norm();
    let x20 = transport_x(20.0, &p, TransportKind::Plus).unwrap().hs_norm();
    let decay_dev = (x20 / x10 / (10.0f64 / 20.0).powi(3) - 1.0).abs();

    vec![
        PropertyResult::check(suite, "numerator_identity", cases, numerator_identity, 1e-13),
        PropertyResult::check(suite, "offdiag_derivative_identity", cases, pid_identity, 1e-13),
        PropertyResult::check(suite, "projection_fd_consistency", cases, fd_projection, 10.0),
        PropertyResult::check(suite, "transport_residual_adjoint", cases, residual_plus, 1e-12),
        PropertyResult::check(suite, "transport_residual_forward", cases, residual_minus, 1e-12),
        PropertyResult::check(suite, "transport_off_diagonality", cases, off_diagonality, 1e-13),
        PropertyResult::check(suite, "transport_cubic_decay", 1, decay_dev, 0.25),
    ]
}

/// The adiabatic-invariant identity on a short run, both projections.
pub fn invariant_suite(_seed: u64) -> Vec<PropertyResult> {
    let suite = "invariant";
    let p = ModelParams::constant(1.0, 1.0, 1.0).unwrap();
    let spec = RunSpec::new(p, 0.02, -10.0, 10.0)
        .unwrap()
        .with_cfg(IntegratorConfig::with_tols(1e-10, 1e-12));

    let plus = verify_invariant_identity(&spec, Observable::PPlus).expect("run");
    let budget = 1e-6 * plus.lhs.abs().max(spec.eps);
    let minus = verify_invariant_identity(&spec, Observable::PMinus).expect("run");

    // Unitary special case exercises the same code path.
    let p0 = ModelParams::constant(1.0, 0.0, 1.0).unwrap();
    let spec0 = RunSpec::new(p0, 0.02, -10.0, 10.0)
        .unwrap()
        .with_cfg(IntegratorConfig::with_tols(1e-10, 1e-12))
        .with_samples(20001);
    let unitary = verify_invariant_identity(&spec0, Observable::PPlus).expect("run");
    let budget0 = 1e-6 * unitary.lhs.abs().max(spec0.eps);

    vec![
        PropertyResult::check(suite, "identity_p_plus", 1, plus.residual, budget),
        PropertyResult::check(suite, "identity_p_minus", 1, minus.residual, budget),
        PropertyResult::check(suite, "lhs_antisymmetry", 1, (plus.lhs + minus.lhs).abs(), 1e-10),
        PropertyResult::check(suite, "identity_unitary_case", 1, unitary.residual, budget0),
    ]
}

/// Norm contraction along trajectories.
pub fn contraction_suite(seed: u64) -> Vec<PropertyResult> {
    let suite = "contraction";
    let mut rng = StdRng::seed_from_u64(seed.wrapping_add(2));
    let p = ModelParams::constant(1.0, 1.0, 1.0).unwrap();
    let cfg = IntegratorConfig::with_tols(1e-10, 1e-12);

    let spec = RunSpec::new(p.clone(), 0.05, -2.0, 2.0)
        .unwrap()
        .with_cfg(cfg.clone())
        .with_samples(401);

    let from_projection = contraction_check(&spec, &spectral(-2.0, &p).p_minus.mat()).expect("run");
    let coherent = contraction_check(&spec, &Mat2::sigma_x().scale(1.0 / 2.0_f64.sqrt())).expect("run");

    let p_unitary = ModelParams::constant(1.0, 0.0, 1.0).unwrap();
    let spec_unitary = RunSpec::new(p_unitary, 0.05, -2.0, 2.0)
        .unwrap()
        .with_cfg(IntegratorConfig::with_tols(1e-12, 1e-14))
        .with_samples(401);
    let unitary = contraction_check(&spec_unitary, &Mat2::sigma_x().scale(1.0 / 2.0_f64.sqrt()))
        .expect("run");
    let mut unitary_drift = 0.0f64;
    for (_, n) in &unitary.norms {
        unitary_drift = unitary_drift.max((n - unitary.initial_norm).abs());
    }

    // Pointwise dissipativity along a trajectory: tr(rho L(rho)) <= 0 at
    // randomly chosen retained samples.
    let traj = crate::experiments::evolve_rho(&spec, None).expect("run");
    let mut pointwise = f64::NEG_INFINITY;
    for _ in 0..100 {
        let i = rng.gen_range(0..traj.samples.len());
        let (s, rho) = &traj.samples[i];
        let herm = (*rho + rho.adjoint()) * C64::new(0.5, 0.0);
        pointwise = pointwise.max(herm.hs_inner(&apply_l(*s, &herm, &p)).re);
    }

    vec![
        PropertyResult::check(
            suite,
            "monotone_from_projection",
            1,
            from_projection.max_increase.max(0.0),
            CONTRACTION_SLACK,
        ),
        PropertyResult::check(
            suite,
            "norm_bounded_by_one",
            1,
            from_projection.norms.iter().map(|x| x.1).fold(0.0, f64::max) - 1.0,
            CONTRACTION_SLACK,
        ),
        PropertyResult::check(suite, "monotone_coherent_seed", 1, coherent.max_increase.max(0.0), CONTRACTION_SLACK),
        PropertyResult::check(
            suite,
            "strict_decay_through_crossing",
            1,
            coherent.final_norm - coherent.initial_norm + 1e-3,
            0.0,
        ),
        PropertyResult::check(suite, "unitary_norm_constant", 1, unitary_drift, 1e-9),
        PropertyResult::check(suite, "pointwise_dissipativity", 100, pointwise.max(0.0), 1e-9),
    ]
}

/// Adiabatic residual magnitude and O(eps) scaling.
pub fn residual_suite(_seed: u64) -> Vec<PropertyResult> {
    let suite = "residual";
    let cfg = IntegratorConfig::with_tols(1e-10, 1e-12);
    let p = ModelParams::constant(1.0, 1.0, 1.0).unwrap();

    let run = |eps: f64| {
        let spec = RunSpec::new(p.clone(), eps, -10.0, 10.0)
            .unwrap()
            .with_cfg(cfg.clone());
        adiabatic_residual(&spec).expect("run")
    };
    let r_coarse = run(0.01);
    let r_fine = run(0.005);
    let ratio = r_coarse / r_fine;
    let ratio_dev = if (1.6..=2.4).contains(&ratio) { 0.0 } else { (ratio - 2.0).abs() };

    let p0 = ModelParams::constant(1.0, 0.0, 1.0).unwrap();
    let spec0 = RunSpec::new(p0, 0.01, -10.0, 10.0)
        .unwrap()
        .with_cfg(cfg.clone());
    let unitary_residual = adiabatic_residual(&spec0).expect("run");

    let trivial = {
        let spec = RunSpec::new(p.clone(), 0.01, 3.0, 3.0).unwrap().with_cfg(cfg);
        adiabatic_residual(&spec).expect("run")
    };

    vec![
        PropertyResult::check(suite, "linear_eps_scaling", 2, ratio_dev, 0.0),
        PropertyResult::check(suite, "unitary_residual_bounded", 1, unitary_residual, 0.05),
        PropertyResult::check(suite, "zero_window_zero_residual", 1, trivial, 0.0),
    ]
}

/// Run one suite (or all) with the given seed.
pub fn run_suite(suite: Suite, seed: u64) -> Vec<PropertyResult> {
    let mut out = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Kernel {
        out.extend(kernel_suite(seed, DEFAULT_CASES));
    }
    if all || suite == Suite::Transport {
        out.extend(transport_suite(seed, DEFAULT_CASES));
    }
    if all || suite == Suite::Invariant {
        out.extend(invariant_suite(seed));
    }
    if all || suite == Suite::Contraction {
        out.extend(contraction_suite(seed));
    }
    if all || suite == Suite::Residual {
        out.extend(residual_suite(seed));
    }
    out
}
