//! Quasiperiodic cocycle families over the circle rotation x -> x + alpha:
//! Szegő, Schrödinger (plain and coupling-shifted), constant and diagonal
//! test families, and user-supplied Fourier-entry maps. Evaluation supports
//! complexified phase x + iy inside the analyticity strip, and iteration
//! returns renormalized products with an additive log ledger.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{CocycleError, Result};
use crate::frac;
use crate::mat2::{c64, C64, Mat2C};

const TAU: f64 = 2.0 * PI;

/// Finite Fourier series on the circle, evaluable on the strip |Im z| < delta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticCircleFunction {
    /// (index n, coefficient) pairs, sorted by index, duplicates merged.
    terms: Vec<(i64, C64)>,
    delta: f64,
}

impl AnalyticCircleFunction {
    pub fn new(terms: Vec<(i64, C64)>, delta: f64) -> Self {
        let mut map: std::collections::BTreeMap<i64, C64> = std::collections::BTreeMap::new();
        for (n, c) in terms {
            *map.entry(n).or_insert(C64::ZERO) += c;
        }
        let terms = map
            .into_iter()
            .filter(|(_, c)| c.norm() > 0.0)
            .collect();
        AnalyticCircleFunction { terms, delta }
    }

    pub fn zero() -> Self {
        AnalyticCircleFunction { terms: vec![], delta: f64::INFINITY }
    }

    pub fn constant(c: C64) -> Self {
        AnalyticCircleFunction::new(vec![(0, c)], f64::INFINITY)
    }

    /// amp * cos(2 pi m x).
    pub fn cosine(amp: f64, m: i64, delta: f64) -> Self {
        let half = c64(0.5 * amp, 0.0);
        AnalyticCircleFunction::new(vec![(m, half), (-m, half)], delta)
    }

    /// Single mode c * e^{2 pi i m x}.
    pub fn mode(c: C64, m: i64, delta: f64) -> Self {
        AnalyticCircleFunction::new(vec![(m, c)], delta)
    }

    pub fn terms(&self) -> &[(i64, C64)] {
        &self.terms
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn coefficient(&self, n: i64) -> C64 {
        self.terms
            .iter()
            .find(|(m, _)| *m == n)
            .map(|(_, c)| *c)
            .unwrap_or(C64::ZERO)
    }

    /// Evaluation at z = x + iy.
    pub fn eval(&self, z: C64) -> C64 {
        let mut acc = C64::ZERO;
        for &(n, c) in &self.terms {
            let nf = n as f64;
            let modulus = (-TAU * nf * z.im).exp();
            acc += c * C64::from_polar(modulus, TAU * nf * z.re);
        }
        acc
    }

    pub fn eval_real(&self, x: f64) -> C64 {
        self.eval(c64(x, 0.0))
    }

    /// Termwise derivative d/dx.
    pub fn derivative(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|&(n, c)| (n, c * c64(0.0, TAU * n as f64)))
            .collect();
        AnalyticCircleFunction { terms, delta: self.delta }
    }

    /// c_{-n} = conj(c_n) for every mode.
    pub fn is_real_on_circle(&self) -> bool {
        let scale: f64 = 1.0 + self.terms.iter().map(|(_, c)| c.norm()).sum::<f64>();
        self.terms
            .iter()
            .all(|&(n, c)| (self.coefficient(-n) - c.conj()).norm() <= 1e-12 * scale)
    }

    /// Upper bound for |f| on the horizontal line at height y.
    pub fn sup_at_height(&self, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(n, c)| c.norm() * (TAU * n as f64 * y.abs()).exp().max((-TAU * n as f64 * y.abs()).exp()))
            .sum()
    }

    /// Upper bound for |f'| on the real circle: sum 2 pi |n| |c_n|.
    pub fn derivative_sup_real(&self) -> f64 {
        self.terms
            .iter()
            .map(|&(n, c)| TAU * (n as f64).abs() * c.norm())
            .sum()
    }

    /// gcd of the nonzero mode indices; None when only the mean is present.
    pub fn index_gcd(&self) -> Option<u64> {
        let mut g: u64 = 0;
        for &(n, _) in &self.terms {
            if n != 0 {
                g = gcd(g, n.unsigned_abs());
            }
        }
        if g == 0 { None } else { Some(g) }
    }

    pub fn scaled(&self, s: C64) -> Self {
        AnalyticCircleFunction {
            terms: self.terms.iter().map(|&(n, c)| (n, c * s)).collect(),
            delta: self.delta,
        }
    }

    pub fn plus_constant(&self, c: C64) -> Self {
        let mut terms = self.terms.clone();
        terms.push((0, c));
        AnalyticCircleFunction::new(terms, self.delta)
    }

    /// Affine rescale so the real-circle range becomes [0, 1], measured on a
    /// 4096-point grid. Identity when the function is constant.
    pub fn normalized_to_unit_range(&self) -> Self {
        let n = 4096;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let v = self.eval_real(i as f64 / n as f64).re;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi - lo <= 1e-14 {
            return self.clone();
        }
        let s = 1.0 / (hi - lo);
        self.scaled(c64(s, 0.0)).plus_constant(c64(-lo * s, 0.0))
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = b;
        b = a % b;
        a = t;
    }
    a
}

/// Verblunsky-generating data f(z) = lambda e^{2 pi i (k z + theta(z))}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SzegoPotential {
    pub k: i64,
    pub theta: AnalyticCircleFunction,
    pub lambda: f64,
}

impl SzegoPotential {
    pub fn new(k: i64, theta: AnalyticCircleFunction, lambda: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(CocycleError::BadCoupling { lambda });
        }
        if !theta.is_real_on_circle() {
            return Err(CocycleError::Invalid {
                what: "theta must be real-valued on the circle".into(),
            });
        }
        Ok(SzegoPotential { k, theta, lambda })
    }

    /// v(z) = e^{2 pi i (k z + theta(z))}; f = lambda v.
    pub fn v(&self, z: C64) -> C64 {
        let w = c64(self.k as f64, 0.0) * z + self.theta.eval(z);
        (c64(0.0, TAU) * w).exp()
    }

    pub fn f(&self, z: C64) -> C64 {
        self.v(z) * c64(self.lambda, 0.0)
    }

    /// Period integer q(theta): largest q with theta(x + 1/q) = theta(x).
    pub fn q_theta(&self) -> Option<u64> {
        self.theta.index_gcd()
    }
}

/// The per-kind data of a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FamilySpec {
    /// SU(1,1)-valued cocycle at spectral point E = e^{2 pi i t}.
    Szego { potential: SzegoPotential, t: f64 },
    /// Transfer cocycle [[E - lambda v, -1], [1, 0]].
    Schrodinger {
        v: AnalyticCircleFunction,
        lambda: f64,
        energy: f64,
    },
    /// Coupling-shifted form [[lambda (t - v), -1/lambda], [lambda, 0]],
    /// conjugate to Schrodinger at E = lambda t.
    SchrodingerShifted {
        v: AnalyticCircleFunction,
        lambda: f64,
        t: f64,
    },
    Constant { m: Mat2C },
    /// diag(e^{2 pi i z}, e^{-2 pi i z}).
    DiagonalExp,
    /// Arbitrary entries [a, b, c, d]; determinant 1 is checked at build.
    Custom { entries: Box<[AnalyticCircleFunction; 4]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocycleFamily {
    spec: FamilySpec,
    alpha: f64,
    y: f64,
}

impl CocycleFamily {
    pub fn new(spec: FamilySpec, alpha: f64, y: f64) -> Result<Self> {
        let fam = CocycleFamily { spec, alpha: frac(alpha), y };
        fam.validate()?;
        Ok(fam)
    }

    fn validate(&self) -> Result<()> {
        let delta = self.delta();
        if self.y.abs() >= delta {
            return Err(CocycleError::StripExceeded { y: self.y, delta });
        }
        match &self.spec {
            FamilySpec::Szego { potential, .. } => {
                // lambda = 0 is allowed as the constant-rotation diagnostic.
                if !(0.0..1.0).contains(&potential.lambda) {
                    return Err(CocycleError::BadCoupling { lambda: potential.lambda });
                }
            }
            FamilySpec::Schrodinger { lambda, .. }
            | FamilySpec::SchrodingerShifted { lambda, .. } => {
                if *lambda <= 0.0 {
                    return Err(CocycleError::BadCoupling { lambda: *lambda });
                }
            }
            FamilySpec::Constant { m } => {
                if !m.is_sl2() {
                    return Err(CocycleError::NonUnimodularDeterminant {
                        det: format!("{}", m.det()),
                    });
                }
            }
            FamilySpec::DiagonalExp => {}
            FamilySpec::Custom { .. } => {
                let mut worst: f64 = 0.0;
                for i in 0..64 {
                    let m = self.evaluate(i as f64 / 64.0);
                    worst = worst.max((m.det() - C64::ONE).norm());
                }
                if worst > 1e-8 {
                    return Err(CocycleError::NonUnimodularFamily { residual: worst });
                }
            }
        }
        Ok(())
    }

    pub fn szego(potential: SzegoPotential, t: f64, alpha: f64, y: f64) -> Result<Self> {
        CocycleFamily::new(FamilySpec::Szego { potential, t: frac(t) }, alpha, y)
    }

    pub fn schrodinger(
        v: AnalyticCircleFunction,
        lambda: f64,
        energy: f64,
        alpha: f64,
        y: f64,
    ) -> Result<Self> {
        CocycleFamily::new(FamilySpec::Schrodinger { v, lambda, energy }, alpha, y)
    }

    /// Schrodinger with the potential affinely rescaled onto [0, 1] first.
    pub fn schrodinger_normalized(
        v: AnalyticCircleFunction,
        lambda: f64,
        energy: f64,
        alpha: f64,
        y: f64,
    ) -> Result<Self> {
        Self::schrodinger(v.normalized_to_unit_range(), lambda, energy, alpha, y)
    }

    pub fn schrodinger_shifted(
        v: AnalyticCircleFunction,
        lambda: f64,
        t: f64,
        alpha: f64,
        y: f64,
    ) -> Result<Self> {
        CocycleFamily::new(FamilySpec::SchrodingerShifted { v, lambda, t }, alpha, y)
    }

    pub fn constant(m: Mat2C, alpha: f64) -> Result<Self> {
        CocycleFamily::new(FamilySpec::Constant { m }, alpha, 0.0)
    }

    pub fn diagonal_exp(alpha: f64, y: f64) -> Self {
        CocycleFamily { spec: FamilySpec::DiagonalExp, alpha: frac(alpha), y }
    }

    pub fn custom(entries: [AnalyticCircleFunction; 4], alpha: f64, y: f64) -> Result<Self> {
        CocycleFamily::new(FamilySpec::Custom { entries: Box::new(entries) }, alpha, y)
    }

    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// Strip half-width of the payload (infinite for constant kinds).
    pub fn delta(&self) -> f64 {
        match &self.spec {
            FamilySpec::Szego { potential, .. } => potential.theta.delta(),
            FamilySpec::Schrodinger { v, .. } | FamilySpec::SchrodingerShifted { v, .. } => {
                v.delta()
            }
            FamilySpec::Constant { .. } | FamilySpec::DiagonalExp => f64::INFINITY,
            FamilySpec::Custom { entries } => {
                entries.iter().map(|e| e.delta()).fold(f64::INFINITY, f64::min)
            }
        }
    }

    pub fn with_height(&self, y: f64) -> Result<Self> {
        CocycleFamily::new(self.spec.clone(), self.alpha, y)
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        CocycleFamily { spec: self.spec.clone(), alpha: frac(alpha), y: self.y }
    }

    /// Replace the spectral parameter: t for Szego / shifted kinds, E for
    /// Schrodinger. No-op for kinds without one.
    pub fn with_spectral(&self, value: f64) -> Self {
        let spec = match self.spec.clone() {
            FamilySpec::Szego { potential, .. } => {
                FamilySpec::Szego { potential, t: frac(value) }
            }
            FamilySpec::Schrodinger { v, lambda, .. } => {
                FamilySpec::Schrodinger { v, lambda, energy: value }
            }
            FamilySpec::SchrodingerShifted { v, lambda, .. } => {
                FamilySpec::SchrodingerShifted { v, lambda, t: value }
            }
            other => other,
        };
        CocycleFamily { spec, alpha: self.alpha, y: self.y }
    }

    /// Cocycle map at complexified phase z = x + iy (y fixed at build).
    pub fn evaluate(&self, x: f64) -> Mat2C {
        let z = c64(x, self.y);
        match &self.spec {
            FamilySpec::Szego { potential, t } => {
                let lam = potential.lambda;
                let pref = c64(1.0 / (1.0 - lam * lam).sqrt(), 0.0);
                // Principal branch: sqrt(E) = e^{i pi t}, t in [0, 1).
                let sqrt_e = C64::from_polar(1.0, PI * t);
                let v = potential.v(z);
                // The off-diagonal uses the reflected conjugate
                // conj(v(conj z)) = 1/v(z), keeping the entry holomorphic.
                let v_refl = C64::ONE / v;
                Mat2C::new(
                    sqrt_e,
                    -c64(lam, 0.0) / sqrt_e * v_refl,
                    -c64(lam, 0.0) * sqrt_e * v,
                    C64::ONE / sqrt_e,
                )
                .scale(pref)
            }
            FamilySpec::Schrodinger { v, lambda, energy } => Mat2C::new(
                c64(*energy, 0.0) - c64(*lambda, 0.0) * v.eval(z),
                -C64::ONE,
                C64::ONE,
                C64::ZERO,
            ),
            FamilySpec::SchrodingerShifted { v, lambda, t } => Mat2C::new(
                c64(*lambda, 0.0) * (c64(*t, 0.0) - v.eval(z)),
                c64(-1.0 / lambda, 0.0),
                c64(*lambda, 0.0),
                C64::ZERO,
            ),
            FamilySpec::Constant { m } => *m,
            FamilySpec::DiagonalExp => {
                let e = (c64(0.0, TAU) * z).exp();
                Mat2C::diag(e, C64::ONE / e)
            }
            FamilySpec::Custom { entries } => Mat2C::new(
                entries[0].eval(z),
                entries[1].eval(z),
                entries[2].eval(z),
                entries[3].eval(z),
            ),
        }
    }

    /// n-step product A(x + (n-1) alpha) ... A(x) in scaled form: the
    /// returned matrix has operator norm in [1, 2] (generically) and
    /// A_n = e^{log_scale} * matrix. Negative n gives the inverse-orbit
    /// product A_{-n}(x) = A_n(x - n alpha)^{-1}.
    pub fn iterate(&self, x: f64, n: i64) -> (Mat2C, f64) {
        if n == 0 {
            return (Mat2C::identity(), 0.0);
        }
        if n < 0 {
            let m = -n;
            let (b, log) = self.iterate(x - m as f64 * self.alpha, m);
            // adj(B) shares the singular values of B, so the same ledger
            // keeps the inverse product in range.
            let adj = Mat2C::new(b.d, -b.b, -b.c, b.a);
            return (adj, log);
        }
        let mut b = Mat2C::identity();
        let mut log = 0.0;
        let mut phase = frac(x);
        for _ in 0..n {
            b = self.evaluate(phase).mul(&b);
            let s = b.singular_norm();
            if s > 2.0 {
                b = b.scale(c64(1.0 / s, 0.0));
                log += s.ln();
            }
            phase = frac(phase + self.alpha);
        }
        (b, log)
    }
}
