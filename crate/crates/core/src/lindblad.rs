//! The dephasing Lindblad generator
//! `L_s(rho) = -i[H(s), rho] - hbar*gamma(s) (P- rho P+ + P+ rho P-)`,
//! its Hilbert-Schmidt adjoint, the vectorized superoperator matrix, and the
//! parallel-transport solution `X(s)` of `L*_s(X) = dP+/ds`.

use crate::error::Error;
use crate::linalg2::{mat_of, vec_of, C64, Mat2, I};
use crate::model::{hamiltonian, spectral, ModelParams, SpectralData};

/// Which projection family a transport solution moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportKind {
    /// Heisenberg-picture solution of `L*(X) = dP+/ds`.
    Plus,
    /// Schroedinger-picture solution of `L(X) = dP-/ds`.
    Minus,
}

/// `L_s(rho)`. Trace-annihilating and Hermiticity-preserving.
pub fn apply_l(s: f64, rho: &Mat2, p: &ModelParams) -> Mat2 {
    let sd = spectral(s, p);
    apply_l_with(&sd, rho, p.gamma_eff(s), p)
}

/// `L_s` with precomputed spectral data; the hot path for the integrator.
pub fn apply_l_with(sd: &SpectralData, rho: &Mat2, gamma_eff: f64, p: &ModelParams) -> Mat2 {
    let h = hamiltonian(sd.s, p).mat();
    let pm = sd.p_minus.mat();
    let pp = sd.p_plus.mat();
    let deph = pm * *rho * pp + pp * *rho * pm;
    h.commutator(rho) * (-I) - deph * C64::new(gamma_eff, 0.0)
}

/// Adjoint generator `L*_s(A) = i[H, A] - hbar*gamma (P- A P+ + P+ A P-)`,
/// the Heisenberg-picture generator for observables.
pub fn apply_l_adj(s: f64, a: &Mat2, p: &ModelParams) -> Mat2 {
    let sd = spectral(s, p);
    let h = hamiltonian(s, p).mat();
    let pm = sd.p_minus.mat();
    let pp = sd.p_plus.mat();
    let deph = pm * *a * pp + pp * *a * pm;
    h.commutator(a) * I - deph * C64::new(p.gamma_eff(s), 0.0)
}

/// 4x4 matrix form of a superoperator under column-stacking vectorization,
/// `vec(rho) = (rho11, rho21, rho12, rho22)`. Row-major storage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperOp4(pub [[C64; 4]; 4]);

impl SuperOp4 {
    pub fn zero() -> Self {
        SuperOp4([[C64::new(0.0, 0.0); 4]; 4])
    }

    pub fn apply(&self, v: &[C64; 4]) -> [C64; 4] {
        let mut out = [C64::new(0.0, 0.0); 4];
        for (row, o) in self.0.iter().zip(out.iter_mut()) {
            *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
        }
        out
    }

    fn add_scaled(&mut self, other: &SuperOp4, c: C64) {
        for i in 0..4 {
            for j in 0..4 {
                self.0[i][j] += c * other.0[i][j];
            }
        }
    }
}

/// Kronecker product consistent with the column-stacking convention:
/// `vec(A X B) = (B^T kron A) vec(X)`.
fn kron(p: &Mat2, q: &Mat2) -> SuperOp4 {
    let mut out = SuperOp4::zero();
    for pr in 0..2 {
        for pc in 0..2 {
            for qr in 0..2 {
                for qc in 0..2 {
                    out.0[2 * pr + qr][2 * pc + qc] = p.0[2 * pr + pc] * q.0[2 * qr + qc];
                }
            }
        }
    }
    out
}

fn transpose(m: &Mat2) -> Mat2 {
    Mat2([m.0[0], m.0[2], m.0[1], m.0[3]])
}

/// Matrix of `L_s` acting on vectorized density matrices. Built from
/// Kronecker products, independently of [`apply_l`].
pub fn superop_matrix(s: f64, p: &ModelParams) -> SuperOp4 {
    let sd = spectral(s, p);
    let h = hamiltonian(s, p).mat();
    let id = Mat2::identity();
    let pm = sd.p_minus.mat();
    let pp = sd.p_plus.mat();

    let mut m = SuperOp4::zero();
    // -i (I kron H) + i (H^T kron I)
    m.add_scaled(&kron(&id, &h), -I);
    m.add_scaled(&kron(&transpose(&h), &id), I);
    // -gamma [ (P+^T kron P-) + (P-^T kron P+) ]
    let g = C64::new(-p.gamma_eff(s), 0.0);
    m.add_scaled(&kron(&transpose(&pp), &pm), g);
    m.add_scaled(&kron(&transpose(&pm), &pp), g);
    m
}

/// Threshold below which the transport denominators are treated as singular.
/// Unreachable for validated parameters (the gap is bounded below by `g0`),
/// but it makes the operation total.
fn gap_threshold(s: f64) -> f64 {
    1e-12 * s.abs().max(1.0)
}

/// Parallel-transport solution built from the spectral block decomposition.
///
/// For [`TransportKind::Plus`] returns
/// `X = -i [ P+ dP+ P- / (g + i*gam) + P- dP+ P+ / (-g + i*gam) ]`
/// which satisfies `L*_s(X) = dP+/ds`; the `Minus` variant swaps
/// `i -> -i`, `dP+ -> dP-` and satisfies `L_s(X) = dP-/ds`. Both are purely
/// off-diagonal in the instantaneous eigenbasis.
pub fn transport_x(s: f64, p: &ModelParams, which: TransportKind) -> Result<Mat2, Error> {
    let sd = spectral(s, p);
    let gamma = p.gamma_eff(s);
    if sd.g < gap_threshold(s) && gamma == 0.0 {
        return Err(Error::SingularGap { s, gap: sd.g });
    }
    let pp = sd.p_plus.mat();
    let pm = sd.p_minus.mat();
    Ok(match which {
        TransportKind::Plus => {
            let dp = sd.dp_plus.mat();
            let upper = pp * dp * pm * (C64::new(sd.g, gamma).inv());
            let lower = pm * dp * pp * (C64::new(-sd.g, gamma).inv());
            (upper + lower) * (-I)
        }
        TransportKind::Minus => {
            let dp = sd.dp_minus.mat();
            let upper = pp * dp * pm * (C64::new(sd.g, -gamma).inv());
            let lower = pm * dp * pp * (C64::new(-sd.g, -gamma).inv());
            (upper + lower) * I
        }
    })
}

/// `dX/ds` by central differences of [`transport_x`] with one step of
/// Richardson refinement; step `h = 1e-5 * (1 + |s|)`.
pub fn transport_x_dot(s: f64, p: &ModelParams, which: TransportKind) -> Result<Mat2, Error> {
    let h = 1e-5 * (1.0 + s.abs());
    let central = |h: f64| -> Result<Mat2, Error> {
        let plus = transport_x(s + h, p, which)?;
        let minus = transport_x(s - h, p, which)?;
        Ok((plus - minus) * C64::new(0.5 / h, 0.0))
    };
    let d1 = central(h)?;
    let d2 = central(0.5 * h)?;
    Ok((d2 * C64::new(4.0, 0.0) - d1) * C64::new(1.0 / 3.0, 0.0))
}

/// 4-vector of a matrix, re-exported alongside the superoperator it feeds.
pub fn vec_rho(rho: &Mat2) -> [C64; 4] {
    vec_of(rho)
}

/// Inverse of [`vec_rho`].
pub fn unvec_rho(v: &[C64]) -> Mat2 {
    mat_of(v)
}
