//! 2x2 complex matrices with the exact conventions the rest of the crate
//! relies on: closed-form operator norm for determinant-1 matrices, spectral
//! radius, the Moebius action on the projective line (with a genuine point at
//! infinity), the polar-type factorization A = U1 U2 Lam U2*, and the fixed
//! unitary change of basis between SU(1,1) and SL(2,R).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CocycleError, Result};

/// Relative tolerance for algebraic membership predicates.
pub const ALG_TOL: f64 = 1e-9;

pub type C64 = Complex64;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Row-major 2x2 complex matrix [[a, b], [c, d]].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2C {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Mat2C {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2C { a, b, c, d }
    }

    pub fn identity() -> Self {
        Mat2C::new(C64::ONE, C64::ZERO, C64::ZERO, C64::ONE)
    }

    pub fn diag(p: C64, q: C64) -> Self {
        Mat2C::new(p, C64::ZERO, C64::ZERO, q)
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2C::new(c64(a, 0.0), c64(b, 0.0), c64(c, 0.0), c64(d, 0.0))
    }

    /// Rotation by the angle 2*pi*theta.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = (2.0 * std::f64::consts::PI * theta).sin_cos();
        Mat2C::from_real(c, -s, s, c)
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    pub fn mul(&self, o: &Mat2C) -> Mat2C {
        Mat2C::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    pub fn adjoint(&self) -> Mat2C {
        Mat2C::new(self.a.conj(), self.c.conj(), self.b.conj(), self.d.conj())
    }

    pub fn scale(&self, s: C64) -> Mat2C {
        Mat2C::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// Inverse via the adjugate; exact adjugate swap when det = 1.
    pub fn inverse(&self) -> Mat2C {
        let inv_det = C64::ONE / self.det();
        Mat2C::new(
            self.d * inv_det,
            -self.b * inv_det,
            -self.c * inv_det,
            self.a * inv_det,
        )
    }

    /// Squared Frobenius norm, which equals tr(A*A).
    pub fn frob_sq(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()
    }

    pub fn frob(&self) -> f64 {
        self.frob_sq().sqrt()
    }

    pub fn sub(&self, o: &Mat2C) -> Mat2C {
        Mat2C::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }

    pub fn max_abs(&self) -> f64 {
        self.a
            .norm()
            .max(self.b.norm())
            .max(self.c.norm())
            .max(self.d.norm())
    }

    pub fn is_sl2(&self) -> bool {
        (self.det() - C64::ONE).norm() <= ALG_TOL * (1.0 + self.frob_sq())
    }

    /// SU(1,1) membership: A* J A = J with J = diag(1, -1).
    pub fn is_su11(&self) -> bool {
        let j = Mat2C::diag(C64::ONE, -C64::ONE);
        let r = self.adjoint().mul(&j).mul(self).sub(&j);
        r.max_abs() <= ALG_TOL * (1.0 + self.frob_sq())
    }

    /// SU(2) membership: A*A = I and det = 1.
    pub fn is_su2(&self) -> bool {
        let r = self.adjoint().mul(self).sub(&Mat2C::identity());
        r.max_abs() <= ALG_TOL * (1.0 + self.frob_sq()) && self.is_sl2()
    }

    /// Largest singular value for an arbitrary finite matrix.
    pub fn singular_norm(&self) -> f64 {
        let t = self.frob_sq();
        let det2 = self.det().norm_sqr();
        let disc = (t * t - 4.0 * det2).max(0.0);
        (0.5 * (t + disc.sqrt())).sqrt()
    }
}

/// Operator norm of a determinant-1 matrix:
/// ||A||^2 = (tr(A*A) + sqrt(tr(A*A)^2 - 4)) / 2.
pub fn op_norm(a: &Mat2C) -> Result<f64> {
    if !a.is_sl2() {
        return Err(CocycleError::NonUnimodularDeterminant {
            det: format!("{}", a.det()),
        });
    }
    let t = a.frob_sq();
    let disc = (t * t - 4.0).max(0.0);
    Ok((0.5 * (t + disc.sqrt())).sqrt().max(1.0))
}

/// Largest eigenvalue modulus via the quadratic formula on trace and det.
pub fn spectral_radius(b: &Mat2C) -> f64 {
    let half_tr = 0.5 * b.trace();
    let disc = (half_tr * half_tr - b.det()).sqrt();
    (half_tr + disc).norm().max((half_tr - disc).norm())
}

/// Point of the complex projective line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MobiusPoint {
    Finite(C64),
    Infinity,
}

impl MobiusPoint {
    pub fn finite(z: C64) -> Self {
        MobiusPoint::Finite(z)
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, MobiusPoint::Infinity)
    }

    /// Chordal (Riemann sphere) distance, bounded by 2.
    pub fn chordal_dist(&self, other: &MobiusPoint) -> f64 {
        match (self, other) {
            (MobiusPoint::Infinity, MobiusPoint::Infinity) => 0.0,
            (MobiusPoint::Finite(z), MobiusPoint::Infinity)
            | (MobiusPoint::Infinity, MobiusPoint::Finite(z)) => {
                2.0 / (1.0 + z.norm_sqr()).sqrt()
            }
            (MobiusPoint::Finite(z), MobiusPoint::Finite(w)) => {
                2.0 * (z - w).norm() / ((1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr())).sqrt()
            }
        }
    }
}

/// Moebius action z -> (az + b)/(cz + d); infinity maps to a/c.
pub fn mobius_apply(m: &Mat2C, z: MobiusPoint) -> MobiusPoint {
    match z {
        MobiusPoint::Infinity => {
            if m.c.norm() == 0.0 {
                MobiusPoint::Infinity
            } else {
                MobiusPoint::Finite(m.a / m.c)
            }
        }
        MobiusPoint::Finite(z) => {
            let den = m.c * z + m.d;
            if den.norm() == 0.0 {
                MobiusPoint::Infinity
            } else {
                MobiusPoint::Finite((m.a * z + m.b) / den)
            }
        }
    }
}

/// Factorization A = U1 U2 Lam U2* with Lam = diag(lam, 1/lam).
#[derive(Debug, Clone, Copy)]
pub struct PolarParts {
    pub u1: Mat2C,
    pub u2: Mat2C,
    pub lam: f64,
}

impl PolarParts {
    pub fn reassemble(&self) -> Mat2C {
        let lam = Mat2C::diag(c64(self.lam, 0.0), c64(1.0 / self.lam, 0.0));
        self.u1.mul(&self.u2).mul(&lam).mul(&self.u2.adjoint())
    }
}

/// Factor a determinant-1 matrix as U1 U2 Lam U2* with U1, U2 special
/// unitary and lam = ||A|| > 1. Undefined on (a neighborhood of) SU(2),
/// where the singular values collide; that case fails with NotSU2Free.
///
/// U2 columns are the eigenvectors of A*A. Each column is taken from
/// whichever row of the rank-one eigen-equation is better conditioned,
/// then the pair is orthonormalized and the determinant phase split evenly
/// so that det U2 = 1.
pub fn polar_decompose(a: &Mat2C) -> Result<PolarParts> {
    polar_decompose_at(a, f64::NAN)
}

/// Same as [`polar_decompose`], tagging failures with the phase x for
/// grid-indexed callers.
pub fn polar_decompose_at(a: &Mat2C, x: f64) -> Result<PolarParts> {
    if !a.is_sl2() {
        return Err(CocycleError::NonUnimodularDeterminant {
            det: format!("{}", a.det()),
        });
    }
    let t = a.frob_sq();
    if t <= 2.0 + ALG_TOL * (1.0 + t) {
        return Err(CocycleError::NotSU2Free { x });
    }
    let disc = (t * t - 4.0).max(0.0).sqrt();
    let mu_plus = 0.5 * (t + disc);
    let mu_minus = 1.0 / mu_plus;
    let lam = mu_plus.sqrt();

    // A*A = [[gamma, beta], [conj(beta), t - gamma]].
    let beta = a.a.conj() * a.b + a.c.conj() * a.d;
    let gamma = a.a.norm_sqr() + a.c.norm_sqr();

    let column = |mu: f64| -> Result<(C64, C64)> {
        let v1 = (beta, c64(mu - gamma, 0.0));
        let v2 = (c64(mu - (t - gamma), 0.0), beta.conj());
        let n1 = v1.0.norm_sqr() + v1.1.norm_sqr();
        let n2 = v2.0.norm_sqr() + v2.1.norm_sqr();
        let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
        if n <= 1e-26 * (1.0 + t * t) {
            return Err(CocycleError::NotSU2Free { x });
        }
        let inv = 1.0 / n.sqrt();
        Ok((v.0 * inv, v.1 * inv))
    };
    let (p0, p1) = column(mu_plus)?;
    let (q0, q1) = column(mu_minus)?;
    // Exactly orthogonal in exact arithmetic; remove the rounding component.
    let overlap = p0.conj() * q0 + p1.conj() * q1;
    let (mut q0, mut q1) = (q0 - overlap * p0, q1 - overlap * p1);
    let qn = (q0.norm_sqr() + q1.norm_sqr()).sqrt();
    if qn <= 1e-13 {
        return Err(CocycleError::NotSU2Free { x });
    }
    q0 /= qn;
    q1 /= qn;

    let u2_raw = Mat2C::new(p0, q0, p1, q1);
    // Unit-modulus determinant; divide by its principal square root.
    let phase = u2_raw.det().sqrt();
    let u2 = u2_raw.scale(C64::ONE / phase);

    let lam_inv = Mat2C::diag(c64(1.0 / lam, 0.0), c64(lam, 0.0));
    let u1 = a.mul(&u2).mul(&lam_inv).mul(&u2.adjoint());

    Ok(PolarParts { u1, u2, lam })
}

/// The fixed unitary Q = (-1/(1+i)) [[1, -i], [1, i]] conjugating SU(1,1)
/// onto SL(2,R).
pub fn q_matrix() -> Mat2C {
    let s = -C64::ONE / c64(1.0, 1.0);
    Mat2C::new(s, s * c64(0.0, -1.0), s, s * c64(0.0, 1.0))
}

/// Q* A Q; maps SU(1,1) members to real matrices.
pub fn conjugate_by_q(a: &Mat2C) -> Mat2C {
    let q = q_matrix();
    q.adjoint().mul(a).mul(&q)
}
