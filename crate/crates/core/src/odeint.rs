//! Adaptive embedded Runge-Kutta integrator (Dormand-Prince 5(4)) for
//! first-order complex vector ODEs, with dense equally spaced sampling via
//! cubic Hermite interpolation between accepted steps.

use crate::error::Error;
use crate::linalg2::C64;

/// Stage times.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

/// Runge-Kutta matrix (lower triangle, row i holds a[i][0..i]).
const A2: [f64; 1] = [0.2];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
/// 5th-order weights (also the last row of A: first-same-as-last pair).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Difference between the 5th- and embedded 4th-order weights.
const ERR: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const SHRINK_LIMIT: f64 = 0.2;
const GROW_LIMIT: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub max_evals: u64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 1e12,
            min_step: 1e-14,
            max_evals: 200_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tols(rel_tol: f64, abs_tol: f64) -> Self {
        IntegratorConfig {
            rel_tol,
            abs_tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::invalid("tolerance", "rel_tol and abs_tol must be > 0"));
        }
        if !(self.min_step > 0.0) || !(self.min_step <= self.max_step) {
            return Err(Error::invalid(
                "step bounds",
                format!("need 0 < min_step <= max_step, got [{}, {}]", self.min_step, self.max_step),
            ));
        }
        if self.max_evals == 0 {
            return Err(Error::invalid("max_evals", "must be > 0"));
        }
        Ok(())
    }
}

/// Equally spaced samples of the solution, first at `s0` and last exactly at
/// `s1`, plus step and evaluation counters.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<(f64, Vec<C64>)>,
    pub accepted: u64,
    pub rejected: u64,
    pub rhs_evals: u64,
}

impl Trajectory {
    pub fn final_state(&self) -> &[C64] {
        &self.samples.last().expect("trajectory has samples").1
    }
}

/// Max over components of `|v_i| / (abs_tol + rel_tol * max(|y0_i|, |y1_i|))`.
fn error_norm(err: &[C64], y0: &[C64], y1: &[C64], cfg: &IntegratorConfig) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..err.len() {
        let scale = cfg.abs_tol + cfg.rel_tol * y0[i].norm().max(y1[i].norm());
        worst = worst.max(err[i].norm() / scale);
    }
    worst
}

/// Deterministic initial step guess from the scaled magnitudes of the state
/// and its derivative.
fn initial_step(y0: &[C64], f0: &[C64], span: f64, cfg: &IntegratorConfig) -> f64 {
    let mut d0 = 0.0f64;
    let mut d1 = 0.0f64;
    for i in 0..y0.len() {
        let scale = cfg.abs_tol + cfg.rel_tol * y0[i].norm();
        d0 = d0.max(y0[i].norm() / scale);
        d1 = d1.max(f0[i].norm() / scale);
    }
    let h = if d0 > 1e-300 && d1 > 1e-300 {
        (0.01 * d0 / d1).min(0.1 * span)
    } else {
        1e-6 * span
    };
    h.clamp(cfg.min_step, cfg.max_step.min(span))
}

fn hermite(
    theta: f64,
    h: f64,
    y0: &[C64],
    f0: &[C64],
    y1: &[C64],
    f1: &[C64],
    out: &mut Vec<C64>,
) {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + theta;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    out.clear();
    for i in 0..y0.len() {
        out.push(y0[i] * h00 + f0[i] * (h10 * h) + y1[i] * h01 + f1[i] * (h11 * h));
    }
}

/// Integrate `dy/ds = rhs(s, y)` from `s0` to `s1 > s0`, retaining
/// `n_samples >= 2` equally spaced samples (cubic Hermite between accepted
/// steps; endpoints are exact integration states).
///
/// Deterministic: identical inputs produce bit-identical trajectories.
pub fn integrate<F>(
    mut rhs: F,
    y0: &[C64],
    s0: f64,
    s1: f64,
    cfg: &IntegratorConfig,
    n_samples: usize,
) -> Result<Trajectory, Error>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    cfg.validate()?;
    if !(s1 > s0) {
        return Err(Error::invalid("interval", format!("need s1 > s0, got [{s0}, {s1}]")));
    }
    if n_samples < 2 {
        return Err(Error::invalid("n_samples", "need at least 2 retained samples"));
    }
    let span = s1 - s0;
    let dim = y0.len();
    let sample_step = span / (n_samples - 1) as f64;
    let sample_at = |j: usize| if j == n_samples - 1 { s1 } else { s0 + j as f64 * sample_step };

    let mut rhs_evals = 0u64;
    let mut accepted = 0u64;
    let mut rejected = 0u64;

    let mut k: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); dim]; 7];
    let mut y = y0.to_vec();
    let mut y_stage = vec![C64::new(0.0, 0.0); dim];
    let mut y_new = vec![C64::new(0.0, 0.0); dim];
    let mut err = vec![C64::new(0.0, 0.0); dim];
    let mut interp = Vec::with_capacity(dim);

    let mut s = s0;
    rhs(s, &y, &mut k[0]);
    rhs_evals += 1;

    let mut samples = Vec::with_capacity(n_samples);
    samples.push((s0, y.clone()));
    let mut next_sample = 1usize;

    let mut h = initial_step(&y, &k[0], span, cfg);

    while s < s1 {
        if rhs_evals + 6 > cfg.max_evals {
            return Err(Error::MaxEvalsExceeded {
                s,
                evals: rhs_evals,
                max_evals: cfg.max_evals,
                last_state: y,
            });
        }
        h = h.min(cfg.max_step);
        let mut final_step = false;
        if s + h >= s1 {
            h = s1 - s;
            final_step = true;
        }
        if h < cfg.min_step && !final_step {
            return Err(Error::StepUnderflow {
                s,
                h,
                min_step: cfg.min_step,
                last_state: y,
            });
        }
        if s + h == s {
            return Err(Error::StepUnderflow {
                s,
                h,
                min_step: cfg.min_step,
                last_state: y,
            });
        }

        // Stages 2..7 (k1 carried over via first-same-as-last).
        let a_rows: [&[f64]; 5] = [&A2, &A3, &A4, &A5, &A6];
        for (stage, a_row) in a_rows.iter().enumerate() {
            for i in 0..dim {
                let mut acc = C64::new(0.0, 0.0);
                for (j, &aij) in a_row.iter().enumerate() {
                    acc += k[j][i] * aij;
                }
                y_stage[i] = y[i] + acc * h;
            }
            rhs(s + C[stage + 1] * h, &y_stage, &mut k[stage + 1]);
            rhs_evals += 1;
        }
        // 5th-order solution, then k7 = f(s + h, y_new).
        for i in 0..dim {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..6 {
                if B5[j] != 0.0 {
                    acc += k[j][i] * B5[j];
                }
            }
            y_new[i] = y[i] + acc * h;
        }
        rhs(s + h, &y_new, &mut k[6]);
        rhs_evals += 1;

        for i in 0..dim {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..7 {
                if ERR[j] != 0.0 {
                    acc += k[j][i] * ERR[j];
                }
            }
            err[i] = acc * h;
        }

        let norm = error_norm(&err, &y, &y_new, cfg);
        let factor = if norm > 0.0 {
            (SAFETY * norm.powf(-0.2)).clamp(SHRINK_LIMIT, GROW_LIMIT)
        } else {
            GROW_LIMIT
        };

        if norm <= 1.0 {
            let s_new = if final_step { s1 } else { s + h };
            // Emit retained samples covered by this step.
            while next_sample < n_samples {
                let target = sample_at(next_sample);
                if target > s_new {
                    break;
                }
                if target == s_new {
                    samples.push((s_new, y_new.clone()));
                } else {
                    let theta = (target - s) / h;
                    hermite(theta, h, &y, &k[0], &y_new, &k[6], &mut interp);
                    samples.push((target, interp.clone()));
                }
                next_sample += 1;
            }
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            s = s_new;
            accepted += 1;
            h *= factor;
        } else {
            rejected += 1;
            h *= factor.min(1.0);
            if h < cfg.min_step {
                return Err(Error::StepUnderflow {
                    s,
                    h,
                    min_step: cfg.min_step,
                    last_state: y,
                });
            }
        }
    }

    debug_assert_eq!(samples.len(), n_samples);
    Ok(Trajectory {
        samples,
        accepted,
        rejected,
        rhs_evals,
    })
}
