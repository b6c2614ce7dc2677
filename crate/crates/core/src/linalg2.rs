//! Exact-size complex 2x2 linear algebra: arithmetic, adjoint, trace,
//! Hilbert-Schmidt inner product and closed-form Hermitian eigendecomposition.
//!
//! Everything here is a small value type; no allocation, no shared state.

use std::ops::{Add, Deref, Mul, Neg, Sub};

use crate::error::Error;

pub type C64 = num_complex::Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// General complex 2x2 matrix, row-major `[a11, a12, a21, a22]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [C64; 4]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([C64::new(0.0, 0.0); 4]);

    pub fn new(a11: C64, a12: C64, a21: C64, a22: C64) -> Self {
        Mat2([a11, a12, a21, a22])
    }

    pub fn from_real(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2([a11.into(), a12.into(), a21.into(), a22.into()])
    }

    pub fn identity() -> Self {
        Mat2::from_real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn sigma_x() -> Self {
        Mat2::from_real(0.0, 1.0, 1.0, 0.0)
    }

    pub fn sigma_y() -> Self {
        Mat2::new(C64::new(0.0, 0.0), -I, I, C64::new(0.0, 0.0))
    }

    pub fn sigma_z() -> Self {
        Mat2::from_real(1.0, 0.0, 0.0, -1.0)
    }

    /// `a0*I + ax*sx + ay*sy + az*sz` for real coefficients.
    pub fn from_pauli(a0: f64, ax: f64, ay: f64, az: f64) -> Self {
        Mat2([
            C64::new(a0 + az, 0.0),
            C64::new(ax, -ay),
            C64::new(ax, ay),
            C64::new(a0 - az, 0.0),
        ])
    }

    pub fn trace(&self) -> C64 {
        self.0[0] + self.0[3]
    }

    pub fn adjoint(&self) -> Mat2 {
        Mat2([
            self.0[0].conj(),
            self.0[2].conj(),
            self.0[1].conj(),
            self.0[3].conj(),
        ])
    }

    /// Hilbert-Schmidt inner product `tr(self^dagger * other)`.
    pub fn hs_inner(&self, other: &Mat2) -> C64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Hilbert-Schmidt (Frobenius) norm.
    pub fn hs_norm(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `[self, other] = self*other - other*self`.
    pub fn commutator(&self, other: &Mat2) -> Mat2 {
        *self * *other - *other * *self
    }

    /// HS norm of the anti-Hermitian part, `||A - A^dagger|| / 2`.
    pub fn hermiticity_defect(&self) -> f64 {
        (*self - self.adjoint()).hs_norm() / 2.0
    }

    /// Eigenvalues of the Hermitian part, smallest first.
    pub fn herm_eigenvalues(&self) -> (f64, f64) {
        let h = (*self + self.adjoint()) * C64::new(0.5, 0.0);
        let a0 = 0.5 * (h.0[0].re + h.0[3].re);
        let az = 0.5 * (h.0[0].re - h.0[3].re);
        let ax = h.0[2].re;
        let ay = h.0[2].im;
        let r = (ax * ax + ay * ay + az * az).sqrt();
        (a0 - r, a0 + r)
    }

    pub fn scale(&self, c: f64) -> Mat2 {
        *self * C64::new(c, 0.0)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        Mat2([
            self.0[0] + rhs.0[0],
            self.0[1] + rhs.0[1],
            self.0[2] + rhs.0[2],
            self.0[3] + rhs.0[3],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        Mat2([
            self.0[0] - rhs.0[0],
            self.0[1] - rhs.0[1],
            self.0[2] - rhs.0[2],
            self.0[3] - rhs.0[3],
        ])
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2([-self.0[0], -self.0[1], -self.0[2], -self.0[3]])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        ])
    }
}

impl Mul<C64> for Mat2 {
    type Output = Mat2;
    fn mul(self, c: C64) -> Mat2 {
        Mat2([self.0[0] * c, self.0[1] * c, self.0[2] * c, self.0[3] * c])
    }
}

/// Hermitian 2x2 matrix. Construction checks `a21 = conj(a12)` and real
/// diagonal to 1e-14 absolute; matrices built internally from real Pauli
/// coefficients are Hermitian by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermMat2(Mat2);

impl HermMat2 {
    pub const DIAG_TOL: f64 = 1e-14;

    pub fn try_new(m: Mat2) -> Result<Self, Error> {
        let defect = (m.0[2] - m.0[1].conj()).norm();
        if defect > Self::DIAG_TOL || m.0[0].im.abs() > Self::DIAG_TOL || m.0[3].im.abs() > Self::DIAG_TOL
        {
            return Err(Error::invalid(
                "matrix",
                format!("not Hermitian within {:.0e}", Self::DIAG_TOL),
            ));
        }
        Ok(HermMat2(m))
    }

    /// Hermitian by construction.
    pub fn from_pauli(a0: f64, ax: f64, ay: f64, az: f64) -> Self {
        HermMat2(Mat2::from_pauli(a0, ax, ay, az))
    }

    pub fn mat(&self) -> Mat2 {
        self.0
    }

    /// Real Pauli coefficients `(a0, ax, ay, az)`.
    pub fn pauli_coeffs(&self) -> (f64, f64, f64, f64) {
        let m = &self.0 .0;
        (
            0.5 * (m[0].re + m[3].re),
            m[2].re,
            m[2].im,
            0.5 * (m[0].re - m[3].re),
        )
    }
}

impl Deref for HermMat2 {
    type Target = Mat2;
    fn deref(&self) -> &Mat2 {
        &self.0
    }
}

impl From<HermMat2> for Mat2 {
    fn from(h: HermMat2) -> Mat2 {
        h.0
    }
}

/// Closed-form eigendecomposition of a Hermitian 2x2 matrix.
#[derive(Debug, Clone, Copy)]
pub struct EigHerm2 {
    pub e_minus: f64,
    pub e_plus: f64,
    pub p_minus: HermMat2,
    pub p_plus: HermMat2,
}

/// Relative splitting below which the projections are considered ill-defined.
pub const DEGENERACY_TOL: f64 = 1e-13;

/// Eigendecomposition via the Pauli form `A = a0*I + a.sigma`:
/// `e± = a0 ± |a|`, `P± = (I ± a^.sigma)/2`. Closed form keeps the
/// projections continuous in the matrix entries (no eigenvector phase
/// ambiguity).
pub fn eig_herm2(a: &HermMat2) -> Result<EigHerm2, Error> {
    let (a0, ax, ay, az) = a.pauli_coeffs();
    let r = (ax * ax + ay * ay + az * az).sqrt();
    let norm = a.hs_norm();
    if 2.0 * r < DEGENERACY_TOL * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateSpectrum {
            gap: 2.0 * r,
            threshold: DEGENERACY_TOL * norm,
        });
    }
    let (nx, ny, nz) = (ax / r, ay / r, az / r);
    Ok(EigHerm2 {
        e_minus: a0 - r,
        e_plus: a0 + r,
        p_minus: HermMat2::from_pauli(0.5, -0.5 * nx, -0.5 * ny, -0.5 * nz),
        p_plus: HermMat2::from_pauli(0.5, 0.5 * nx, 0.5 * ny, 0.5 * nz),
    })
}

/// Column-stacked 4-vector of a 2x2 matrix: `(a11, a21, a12, a22)`.
pub fn vec_of(m: &Mat2) -> [C64; 4] {
    [m.0[0], m.0[2], m.0[1], m.0[3]]
}

/// Inverse of [`vec_of`].
pub fn mat_of(v: &[C64]) -> Mat2 {
    debug_assert_eq!(v.len(), 4);
    Mat2([v[0], v[2], v[1], v[3]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn assert_close(a: C64, b: C64, tol: f64) {
        assert!((a - b).norm() <= tol, "{a} vs {b}");
    }

    fn assert_mat_close(a: &Mat2, b: &Mat2, tol: f64) {
        assert!((*a - *b).hs_norm() <= tol, "{a:?} vs {b:?}");
    }

    fn random_hermitian(rng: &mut impl Rng) -> HermMat2 {
        HermMat2::from_pauli(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        )
    }

    #[test]
    fn hs_inner_identity() {
        let id = Mat2::identity();
        assert_close(id.hs_inner(&id), C64::new(2.0, 0.0), 0.0);
    }

    #[test]
    fn hs_inner_pauli_orthogonality() {
        assert_close(Mat2::sigma_x().hs_inner(&Mat2::sigma_y()), C64::new(0.0, 0.0), 0.0);
        assert_close(Mat2::sigma_z().hs_inner(&Mat2::sigma_z()), C64::new(2.0, 0.0), 0.0);
    }

    #[test]
    fn hs_inner_conjugate_symmetric_and_positive() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let a = Mat2([
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            ]);
            let b = random_hermitian(&mut rng).mat();
            assert_close(a.hs_inner(&b), b.hs_inner(&a).conj(), 1e-14);
            let aa = a.hs_inner(&a);
            assert!(aa.re >= 0.0);
            assert!(aa.im.abs() <= 1e-15 * aa.re.max(1.0));
        }
    }

    #[test]
    fn eig_sigma_z() {
        let e = eig_herm2(&HermMat2::try_new(Mat2::sigma_z()).unwrap()).unwrap();
        assert_eq!(e.e_minus, -1.0);
        assert_eq!(e.e_plus, 1.0);
        assert_mat_close(&e.p_minus.mat(), &Mat2::from_real(0.0, 0.0, 0.0, 1.0), 1e-15);
        assert_mat_close(&e.p_plus.mat(), &Mat2::from_real(1.0, 0.0, 0.0, 0.0), 1e-15);
    }

    #[test]
    fn eig_half_sigma_x() {
        // H(0, 1) = sx/2: symmetric crossing point.
        let h = HermMat2::from_pauli(0.0, 0.5, 0.0, 0.0);
        let e = eig_herm2(&h).unwrap();
        assert_eq!(e.e_minus, -0.5);
        assert_eq!(e.e_plus, 0.5);
        let expect_p = (Mat2::identity() + Mat2::sigma_x()).scale(0.5);
        let expect_m = (Mat2::identity() - Mat2::sigma_x()).scale(0.5);
        assert_mat_close(&e.p_plus.mat(), &expect_p, 1e-15);
        assert_mat_close(&e.p_minus.mat(), &expect_m, 1e-15);
    }

    #[test]
    fn eig_at_unit_sweep() {
        // H(1, 1) has eigenvalues ±sqrt(2)/2 (characteristic polynomial
        // lambda^2 = (s^2 + g0^2)/4).
        let h = HermMat2::from_pauli(0.0, 0.5, 0.0, 0.5);
        let e = eig_herm2(&h).unwrap();
        let half_sqrt2 = 0.5 * 2.0_f64.sqrt();
        assert!((e.e_plus - half_sqrt2).abs() <= 1e-15);
        assert!((e.e_minus + half_sqrt2).abs() <= 1e-15);
    }

    #[test]
    fn eig_degenerate_input_rejected() {
        let id = HermMat2::try_new(Mat2::identity()).unwrap();
        match eig_herm2(&id) {
            Err(Error::DegenerateSpectrum { .. }) => {}
            other => panic!("expected degeneracy error, got {other:?}"),
        }
    }

    #[test]
    fn eig_reconstruction_and_projector_identities() {
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..1000 {
            let a = random_hermitian(&mut rng);
            let e = match eig_herm2(&a) {
                Ok(e) => e,
                Err(Error::DegenerateSpectrum { .. }) => continue,
                Err(err) => panic!("{err}"),
            };
            let norm = a.hs_norm().max(1e-300);
            let rebuilt = e.p_minus.mat().scale(e.e_minus) + e.p_plus.mat().scale(e.e_plus);
            assert!((rebuilt - a.mat()).hs_norm() <= 1e-12 * norm);

            let pp = e.p_plus.mat();
            let pm = e.p_minus.mat();
            assert!((pp * pp - pp).hs_norm() <= 1e-12);
            assert!((pm * pm - pm).hs_norm() <= 1e-12);
            assert!((pp * pm).hs_norm() <= 1e-12);
            assert!((pp + pm - Mat2::identity()).hs_norm() <= 1e-12);
        }
    }

    #[test]
    fn vec_mat_roundtrip_and_order() {
        let m = Mat2::from_real(1.0, 2.0, 3.0, 4.0);
        let v = vec_of(&m);
        // Column stacking: (a11, a21, a12, a22).
        assert_eq!(v[0].re, 1.0);
        assert_eq!(v[1].re, 3.0);
        assert_eq!(v[2].re, 2.0);
        assert_eq!(v[3].re, 4.0);
        assert_eq!(mat_of(&v), m);
    }

    #[test]
    fn herm_mat_rejects_non_hermitian() {
        assert!(HermMat2::try_new(Mat2::from_real(0.0, 1.0, 0.0, 0.0)).is_err());
        assert!(HermMat2::try_new(Mat2::new(
            C64::new(0.0, 1e-3),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0)
        ))
        .is_err());
    }
}
