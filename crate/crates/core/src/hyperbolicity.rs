//! Uniform-hyperbolicity machinery: reduction of a cocycle to the product
//! form Lambda(x) U(x) through per-phase polar factorizations, a cone-field
//! certificate with a quantitative Lyapunov lower bound, closed-form |c|
//! entries for the Szegő and shifted-Schrödinger kinds, the finite
//! exceptional parameter set where the certificate degenerates, invariant
//! unstable/stable sections with their multiplier r(x) and its winding
//! number, and the Fourier-side cohomological equation.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CocycleError, Result};
use crate::families::{AnalyticCircleFunction, CocycleFamily, FamilySpec, SzegoPotential};
use crate::frac;
use crate::mat2::{c64, mobius_apply, polar_decompose_at, C64, Mat2C, MobiusPoint, PolarParts};

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Per-sample data of the conjugated system Lambda(x) U(x).
#[derive(Debug, Clone, Serialize)]
pub struct ReducedCocycle {
    pub grid: Vec<f64>,
    /// ||A(x)|| per sample.
    pub lam_of_x: Vec<f64>,
    /// Upper-left entry of U(x); |c|^2 + |d|^2 = 1.
    pub c_of_x: Vec<C64>,
    /// Lower-left entry of U(x).
    pub d_of_x: Vec<C64>,
    /// Max over the grid of ||U3(x+alpha)* A(x) U3(x) - Lambda(x) U(x)||.
    pub conjugacy_residual: f64,
}

/// U(x) = U2(x)* U1(x-alpha) U2(x-alpha), built from the polar parts at x
/// and at x - alpha. With A = U1 (U2 Lambda U2*) this equals
/// U2(x)* A(x-alpha) U2(x-alpha) Lambda(x-alpha)^{-1}; since U1 and the
/// positive part are gauge free, |c| is well defined.
fn reduced_u(at_x: &PolarParts, at_xm: &PolarParts) -> Mat2C {
    at_x.u2.adjoint().mul(&at_xm.u1).mul(&at_xm.u2)
}

/// The conjugator U3(x) = U1(x-alpha) U2(x-alpha), from the polar parts at
/// x - alpha. It satisfies U3(x+alpha)* A(x) U3(x) = Lambda(x) U(x).
fn u3_from(at_xm: &PolarParts) -> Mat2C {
    at_xm.u1.mul(&at_xm.u2)
}

/// Conjugate the family to the form Lambda(x) U(x) on a uniform grid.
pub fn reduce(fam: &CocycleFamily, grid_size: usize) -> Result<ReducedCocycle> {
    assert!(grid_size >= 2);
    let alpha = fam.alpha();
    let rows: Vec<Result<(f64, C64, C64, f64)>> = (0..grid_size)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 / grid_size as f64;
            let at_x = polar_decompose_at(&fam.evaluate(x), x)?;
            let xm = frac(x - alpha);
            let at_xm = polar_decompose_at(&fam.evaluate(xm), xm)?;
            let u = reduced_u(&at_x, &at_xm);
            let lam_u = Mat2C::diag(c64(at_x.lam, 0.0), c64(1.0 / at_x.lam, 0.0)).mul(&u);
            let lhs = u3_from(&at_x)
                .adjoint()
                .mul(&fam.evaluate(x))
                .mul(&u3_from(&at_xm));
            let residual = lhs.sub(&lam_u).max_abs();
            Ok((at_x.lam, u.a, u.c, residual))
        })
        .collect();
    let mut lam_of_x = Vec::with_capacity(grid_size);
    let mut c_of_x = Vec::with_capacity(grid_size);
    let mut d_of_x = Vec::with_capacity(grid_size);
    let mut worst = 0.0f64;
    for row in rows {
        let (lam, c, d, residual) = row?;
        lam_of_x.push(lam);
        c_of_x.push(c);
        d_of_x.push(d);
        worst = worst.max(residual);
    }
    Ok(ReducedCocycle {
        grid: (0..grid_size).map(|i| i as f64 / grid_size as f64).collect(),
        lam_of_x,
        c_of_x,
        d_of_x,
        conjugacy_residual: worst,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClosedFormDiagnostics {
    /// The auxiliary quantity a at z (kind-specific).
    pub a: f64,
    /// r at z: |v(z)| for the Szegő kind, t - v(z) for the shifted kind.
    pub r: C64,
}

fn szego_a(lambda: f64, r: f64) -> f64 {
    let s = lambda * (r - 1.0 / r);
    s + (4.0 + s * s).sqrt()
}

fn szego_norm(lambda: f64, r: f64) -> f64 {
    let s = lambda * (r - 1.0 / r);
    ((2.0 + lambda * lambda * (r * r + 1.0 / (r * r))
        + lambda * (r + 1.0 / r) * (4.0 + s * s).sqrt())
        / (2.0 * (1.0 - lambda * lambda)))
        .sqrt()
}

fn shifted_a(lambda: f64, r: C64) -> f64 {
    let s = r.norm_sqr() + 1.0 + lambda.powi(-4);
    s + (s * s - 4.0 * lambda.powi(-4)).max(0.0).sqrt()
}

/// |c(z)| of the reduced system by the explicit per-kind formulas, without
/// any polar factorization. Supported for the Szegő and shifted-Schrödinger
/// kinds only.
pub fn closed_form_c(fam: &CocycleFamily, x: f64) -> Result<(f64, ClosedFormDiagnostics)> {
    let alpha = fam.alpha();
    let z = c64(x, fam.y());
    let zm = c64(frac(x - alpha), fam.y());
    match fam.spec() {
        FamilySpec::Szego { potential, t } => {
            let lambda = potential.lambda;
            if !(0.0..1.0).contains(&lambda) {
                return Err(CocycleError::BadCoupling { lambda });
            }
            let e = C64::from_polar(1.0, TAU * t);
            let v = potential.v(z);
            let vm = potential.v(zm);
            let diag = ClosedFormDiagnostics { a: szego_a(lambda, v.norm()), r: c64(v.norm(), 0.0) };
            if fam.y() == 0.0 {
                // On the real circle the whole expression collapses.
                return Ok(((e * v + vm).norm() / 2.0, diag));
            }
            let (r, rm) = (v.norm(), vm.norm());
            let (a, am) = (szego_a(lambda, r), szego_a(lambda, rm));
            // e^{2 pi i (h(z - alpha) - h(z))} with v = r e^{2 pi i h}.
            let phase = (vm / rm) * (r / v);
            let big = c64(am * a, 0.0) * e
                + 4.0 * phase
                + c64(2.0 * lambda * a / rm, 0.0) * e
                + c64(2.0 * lambda * rm * am, 0.0) * phase;
            let c1 = 1.0
                / (szego_norm(lambda, rm)
                    * ((a * a + 4.0) * (am * am + 4.0) * (1.0 - lambda * lambda)).sqrt());
            Ok(((c64(c1, 0.0) * big).norm(), diag))
        }
        FamilySpec::SchrodingerShifted { v, lambda, t } => {
            let lambda = *lambda;
            if lambda <= 0.0 {
                return Err(CocycleError::BadCoupling { lambda });
            }
            let r = c64(*t, 0.0) - v.eval(z);
            let rm = c64(*t, 0.0) - v.eval(zm);
            let (a, am) = (shifted_a(lambda, r), shifted_a(lambda, rm));
            let f = |a: f64, r: C64| {
                1.0 / (((a - 2.0 * lambda.powi(-4)).powi(2)
                    + 4.0 * lambda.powi(-4) * r.norm_sqr())
                    .sqrt())
            };
            let big = rm - 2.0 * r.conj() / (lambda.powi(2) * a)
                - 2.0 * rm / (lambda.powi(4) * a)
                + 4.0 * r.conj() / (lambda.powi(6) * am * a);
            let c4 = (2.0 / am).sqrt() * f(am, rm) * f(a, r) * am * a;
            Ok(((c64(c4, 0.0) * big).norm(), ClosedFormDiagnostics { a, r }))
        }
        _ => Err(CocycleError::Invalid {
            what: "closed-form |c| exists only for szego and schrodinger_shifted kinds".into(),
        }),
    }
}

/// How the gap between a finite grid and the true infimum is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MarginPolicy {
    /// Subtract (measured max slope) * (half grid step) from the infima;
    /// certificate labeled "grid".
    MeasuredLipschitz,
    /// No slack; certificate labeled "heuristic".
    None,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConeCertificate {
    /// Lower bound for |c(x)| over the circle.
    pub gamma: f64,
    /// Cone radius parameter 1/gamma + sqrt(1/gamma^2 - 1).
    pub rho: f64,
    /// Lower bound for ||A(x)|| over the circle.
    pub lam_hat: f64,
    /// Certified bound L >= ln(lam_hat) - ln(2 rho).
    pub le_lower_bound: f64,
    pub grid_size: usize,
    pub margin: f64,
    /// "grid" when a Lipschitz slack was subtracted, else "heuristic".
    pub label: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub enum CertFailure {
    /// lam_hat fails the strict bound against rho.
    NotExpanding { lam_hat: f64, rho: f64 },
    /// inf |c| does not clear the margin.
    CVanishes { inf_c: f64, margin: f64 },
    /// The family touches SU(2) on the grid.
    NotSU2Free { x: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub enum CertOutcome {
    Certified(ConeCertificate),
    Failed(CertFailure),
}

impl CertOutcome {
    pub fn certificate(&self) -> Option<&ConeCertificate> {
        match self {
            CertOutcome::Certified(c) => Some(c),
            CertOutcome::Failed(_) => None,
        }
    }
}

/// Grid certificate of uniform hyperbolicity via an invariant cone field.
/// gamma bounds |c| from below, lam_hat bounds ||A||; the cocycle maps the
/// cone about the unstable direction strictly inside itself when
/// lam_hat > rho(gamma), and then L >= ln(lam_hat) - ln(2 rho).
pub fn cone_certify(
    fam: &CocycleFamily,
    grid_size: usize,
    policy: MarginPolicy,
) -> CertOutcome {
    let red = match reduce(fam, grid_size) {
        Ok(r) => r,
        Err(CocycleError::NotSU2Free { x }) => {
            return CertOutcome::Failed(CertFailure::NotSU2Free { x })
        }
        Err(e) => panic!("reduce failed on a validated family: {e}"),
    };
    let n = grid_size as f64;
    let abs_c: Vec<f64> = red.c_of_x.iter().map(|c| c.norm()).collect();
    let inf_c = abs_c.iter().cloned().fold(f64::INFINITY, f64::min);
    let inf_lam = red.lam_of_x.iter().cloned().fold(f64::INFINITY, f64::min);

    let (margin_c, margin_lam, label) = match policy {
        MarginPolicy::None => (0.0, 0.0, "heuristic"),
        MarginPolicy::MeasuredLipschitz => {
            let max_slope = |vals: &[f64]| {
                let mut worst = 0.0f64;
                for i in 0..vals.len() {
                    let j = (i + 1) % vals.len();
                    worst = worst.max((vals[j] - vals[i]).abs() * n);
                }
                worst
            };
            (
                max_slope(&abs_c) * 0.5 / n,
                max_slope(&red.lam_of_x) * 0.5 / n,
                "grid",
            )
        }
    };
    let margin = margin_c.max(margin_lam);

    let gamma = inf_c - margin_c;
    if gamma <= 0.0 {
        return CertOutcome::Failed(CertFailure::CVanishes { inf_c, margin: margin_c });
    }
    let gamma = gamma.min(1.0);
    let rho = 1.0 / gamma + (1.0 / (gamma * gamma) - 1.0).max(0.0).sqrt();
    let lam_hat = inf_lam - margin_lam;
    // Strict inequality with a fixed 1e-6 slack; ties fail.
    if lam_hat <= rho + 1e-6 {
        return CertOutcome::Failed(CertFailure::NotExpanding { lam_hat, rho });
    }
    CertOutcome::Certified(ConeCertificate {
        gamma,
        rho,
        lam_hat,
        le_lower_bound: lam_hat.ln() - (2.0 * rho).ln(),
        grid_size,
        margin,
        label,
    })
}

/// The finite set of (alpha = p/q, t) pairs where the reduced |c| vanishes
/// identically for every coupling, forcing a zero exponent.
#[derive(Debug, Clone, Serialize)]
pub struct ExceptionalSet {
    /// (p, q, t): frequency p/q and spectral phase t in [0, 1).
    pub pairs: Vec<(u64, u64, f64)>,
    pub q_theta: u64,
}

/// Enumerate the exceptional pairs for the potential data (theta, k).
/// A pair (p/q, t) qualifies exactly when theta is p/q-shift invariant
/// (every nonzero mode index n satisfies n p/q integral) and t makes the
/// resulting constant phase condition hold; that pins t = frac(1/2 - k p/q).
pub fn exceptional_set(theta: &AnalyticCircleFunction, k: i64) -> Result<ExceptionalSet> {
    let q = theta.index_gcd().ok_or(CocycleError::ConstantTheta)?;
    let mut pairs = Vec::new();
    for p in 0..q {
        let invariant = theta
            .terms()
            .iter()
            .all(|&(n, _)| n == 0 || (n.unsigned_abs() * p) % q == 0);
        if invariant {
            let t = frac(0.5 - k as f64 * p as f64 / q as f64);
            pairs.push((p, q, t));
        }
    }
    Ok(ExceptionalSet { pairs, q_theta: q })
}

/// Convenience: the exceptional set of a full Szegő potential.
pub fn exceptional_set_of(potential: &SzegoPotential) -> Result<ExceptionalSet> {
    exceptional_set(&potential.theta, potential.k)
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantSections {
    pub grid: Vec<f64>,
    pub u_of_x: Vec<MobiusPoint>,
    pub s_of_x: Vec<MobiusPoint>,
    /// Unstable multiplier: A(x) u(x) = r(x) u(x+alpha) for unit sections.
    pub r_of_x: Vec<C64>,
    pub invariance_residual: f64,
}

/// Polar parts along the backward orbit w_j = x - j alpha, j = 0..=n+1.
fn orbit_polars_back(fam: &CocycleFamily, x: f64, n: usize) -> Result<Vec<PolarParts>> {
    let alpha = fam.alpha();
    (0..=n + 1)
        .map(|j| {
            let w = frac(x - j as f64 * alpha);
            polar_decompose_at(&fam.evaluate(w), w)
        })
        .collect()
}

/// One application of the reduced map Lambda U at a point with polar parts
/// (here, here_minus): zeta is the slope chart 1/z around the expanding
/// axis, mapped forward to the base point shifted by +alpha.
fn zeta_step(parts_here: &PolarParts, parts_minus: &PolarParts, zeta: C64) -> C64 {
    let u = reduced_u(parts_here, parts_minus);
    let lam = parts_here.lam;
    // U = [[c, -conj(d)], [d, conj(c)]].
    let (c, d) = (u.a, u.c);
    (d + c.conj() * zeta) / (c64(lam * lam, 0.0) * (c - d.conj() * zeta))
}

/// zeta(x) of the unstable section of the reduced system, by n forward
/// steps from the cone center. Also returns the polar parts at x and
/// x - alpha for reuse.
fn unstable_zeta(fam: &CocycleFamily, x: f64, n: usize) -> Result<(C64, PolarParts, PolarParts)> {
    let polars = orbit_polars_back(fam, x, n)?;
    let mut zeta = C64::ZERO;
    // w_n -> w_{n-1} -> ... -> w_0 = x; the step at w_j needs parts at w_j
    // and w_{j+1} = w_j - alpha.
    for j in (1..=n).rev() {
        zeta = zeta_step(&polars[j], &polars[j + 1], zeta);
        if !zeta.is_finite() || zeta.norm() >= 1.0 {
            return Err(CocycleError::NoConvergence { residual: f64::INFINITY, iters: n - j });
        }
    }
    Ok((zeta, polars[0], polars[1]))
}

/// Unstable/stable sections and the unstable multiplier on a uniform grid,
/// by forward (resp. backward) iteration of the projectivized reduced map.
/// Requires a valid certificate; the cone keeps the iteration in one chart.
pub fn diagonalize_uh(
    fam: &CocycleFamily,
    cert: &ConeCertificate,
    grid_size: usize,
    power_iters: usize,
) -> Result<InvariantSections> {
    assert!(cert.lam_hat > cert.rho, "certificate must be valid");
    let alpha = fam.alpha();
    let n = power_iters;

    struct Row {
        u: MobiusPoint,
        u_next: MobiusPoint,
        s: MobiusPoint,
        r: C64,
    }

    let rows: Vec<Result<Row>> = (0..grid_size)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 / grid_size as f64;
            let (zeta, at_x, at_xm) = unstable_zeta(fam, x, n)?;
            // Multiplier of the reduced map on the unit section at x.
            let u = reduced_u(&at_x, &at_xm);
            let lam = at_x.lam;
            let lead = c64(lam, 0.0) * (u.a - u.c.conj() * zeta);
            let zeta_next = (u.c + u.a.conj() * zeta) / (c64(lam * lam, 0.0) * (u.a - u.c.conj() * zeta));
            let r = lead * ((1.0 + zeta_next.norm_sqr()) / (1.0 + zeta.norm_sqr())).sqrt();

            // Independent section at x + alpha for the residual check.
            let (zeta_shift, _, at_shift_m) = unstable_zeta(fam, frac(x + alpha), n)?;

            // Map back to the original coordinates with U3.
            let u_point = |zeta: C64, parts_minus: &PolarParts| {
                let p = if zeta.norm() == 0.0 {
                    MobiusPoint::Infinity
                } else {
                    MobiusPoint::Finite(C64::ONE / zeta)
                };
                mobius_apply(&u3_from(parts_minus), p)
            };
            let u_here = u_point(zeta, &at_xm);
            let u_next = u_point(zeta_shift, &at_shift_m);

            // Stable section: backward iteration in the plain chart.
            let polars = orbit_polars_back(fam, frac(x + n as f64 * alpha), n + 1)?;
            // polars[j] sits at x + (n - j) alpha; the reduced map at index
            // v_m = x + m alpha uses parts at j = n - m and j = n - m + 1.
            let mut s_red = MobiusPoint::Finite(C64::ZERO);
            for m in (0..n).rev() {
                let here = &polars[n - m];
                let minus = &polars[n - m + 1];
                let u_m = reduced_u(here, minus);
                let lam_m = Mat2C::diag(c64(here.lam, 0.0), c64(1.0 / here.lam, 0.0));
                let m_inv = lam_m.mul(&u_m).inverse();
                s_red = mobius_apply(&m_inv, s_red);
            }
            let s_here = mobius_apply(&u3_from(&polars[n + 1]), s_red);

            Ok(Row { u: u_here, u_next, s: s_here, r })
        })
        .collect();

    let mut u_of_x = Vec::with_capacity(grid_size);
    let mut s_of_x = Vec::with_capacity(grid_size);
    let mut r_of_x = Vec::with_capacity(grid_size);
    let mut residual = 0.0f64;
    for (i, row) in rows.into_iter().enumerate() {
        let row = row?;
        let x = i as f64 / grid_size as f64;
        let pushed = mobius_apply(&fam.evaluate(x), row.u);
        residual = residual.max(pushed.chordal_dist(&row.u_next));
        u_of_x.push(row.u);
        s_of_x.push(row.s);
        r_of_x.push(row.r);
    }
    if residual > 1e-8 {
        return Err(CocycleError::NoConvergence { residual, iters: n });
    }
    Ok(InvariantSections {
        grid: (0..grid_size).map(|i| i as f64 / grid_size as f64).collect(),
        u_of_x,
        s_of_x,
        r_of_x,
        invariance_residual: residual,
    })
}

/// Winding number of x -> 1/r(x) about the origin, from summed
/// principal-branch phase increments over the closed grid loop.
pub fn winding_number(sections: &InvariantSections) -> Result<i64> {
    let r = &sections.r_of_x;
    assert!(r.len() >= 2);
    let mut total = 0.0f64;
    for i in 0..r.len() {
        let j = (i + 1) % r.len();
        // increment of arg(1/r) = -arg(r_j / r_i).
        let inc = -(r[j] / r[i]).arg();
        if inc.abs() > std::f64::consts::FRAC_PI_2 {
            return Err(CocycleError::AmbiguousWinding { increment: inc });
        }
        total += inc;
    }
    let turns = total / TAU;
    let k = turns.round();
    if (turns - k).abs() > 0.1 {
        return Err(CocycleError::Invalid {
            what: format!("winding sum {turns} is not near an integer"),
        });
    }
    Ok(k as i64)
}

/// Winding with grid refinement: double the sampling until the phase
/// increments are unambiguous, up to 2^14 samples.
pub fn winding_number_refined(
    fam: &CocycleFamily,
    cert: &ConeCertificate,
    start_grid: usize,
    power_iters: usize,
) -> Result<i64> {
    let mut grid = start_grid.max(16);
    loop {
        let sections = diagonalize_uh(fam, cert, grid, power_iters)?;
        match winding_number(&sections) {
            Err(CocycleError::AmbiguousWinding { .. }) if grid < (1 << 14) => grid *= 2,
            other => return other,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CohomologySolution {
    /// Fourier solution beta with beta(x+alpha) - beta(x) = g(x) - L.
    pub solution: AnalyticCircleFunction,
    /// Max plug-back error on a 256-point grid.
    pub residual: f64,
}

/// Solve beta(x + alpha) - beta(x) = g(x) - L coefficientwise:
/// beta_n = g_n / (e^{2 pi i n alpha} - 1) for 0 < |n| <= cutoff.
pub fn cohomology_solve(
    g: &AnalyticCircleFunction,
    l_value: f64,
    alpha: f64,
    cutoff: i64,
) -> Result<CohomologySolution> {
    let mean = (g.coefficient(0) - c64(l_value, 0.0)).norm();
    if mean > 1e-8 * (1.0 + l_value.abs()) {
        return Err(CocycleError::MeanObstruction { mean });
    }
    let mut terms = Vec::new();
    for &(n, coeff) in g.terms() {
        if n == 0 || n.abs() > cutoff {
            continue;
        }
        let divisor = C64::from_polar(1.0, TAU * n as f64 * alpha) - C64::ONE;
        if divisor.norm() < 1e-12 {
            return Err(CocycleError::SmallDivisorBlowup { n, divisor: divisor.norm() });
        }
        terms.push((n, coeff / divisor));
    }
    let solution = AnalyticCircleFunction::new(terms, g.delta());
    let mut residual = 0.0f64;
    let m = 256;
    for i in 0..m {
        let x = i as f64 / m as f64;
        let lhs = solution.eval_real(frac(x + alpha)) - solution.eval_real(x);
        let rhs = g.eval_real(x) - c64(l_value, 0.0);
        residual = residual.max((lhs - rhs).norm());
    }
    Ok(CohomologySolution { solution, residual })
}
