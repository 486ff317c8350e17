//! Lyapunov-exponent estimation and its diagnostics: ergodic iteration with
//! renormalized products, exact spectral-radius quadrature at rational
//! frequency, the profile of L in the complexification height y with
//! convexity/affinity residuals, finite-difference acceleration with integer
//! snap, the affine-profile regularity test, two integral identities used as
//! cross-checks, and continued-fraction arithmetic.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CocycleError, Result};
use crate::families::{CocycleFamily, SzegoPotential};
use crate::mat2::{spectral_radius, Mat2C};
use crate::{frac, tree_sum};

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// How phases are chosen for an orbit average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PhaseMode {
    /// One orbit from the given initial phase.
    Single(f64),
    /// Average of log-norms over this many equispaced initial phases.
    GridAveraged(usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovEstimate {
    /// nats per step.
    pub value: f64,
    pub n: usize,
    pub phase_mode: PhaseMode,
    pub renorm_count: usize,
    /// |L_n - L_{n/2}|, a convergence diagnostic.
    pub half_orbit_gap: f64,
}

/// ln ||A_n(x0)|| at n/2 and n, plus the rescale count.
fn orbit_lognorms(fam: &CocycleFamily, x0: f64, n: usize) -> (f64, f64, usize) {
    let alpha = fam.alpha();
    let mut b = Mat2C::identity();
    let mut log = 0.0;
    let mut renorms = 0usize;
    let mut phase = frac(x0);
    let mut half = 0.0;
    let half_at = n / 2;
    for step in 0..n {
        b = fam.evaluate(phase).mul(&b);
        let s = b.singular_norm();
        if s > 2.0 {
            b = b.scale(crate::mat2::c64(1.0 / s, 0.0));
            log += s.ln();
            renorms += 1;
        }
        phase = frac(phase + alpha);
        if step + 1 == half_at {
            half = log + b.singular_norm().ln();
        }
    }
    (half, log + b.singular_norm().ln(), renorms)
}

/// Finite-orbit Lyapunov estimate L = ln ||A_n|| / n.
pub fn le_iterate(fam: &CocycleFamily, n: usize, mode: PhaseMode) -> LyapunovEstimate {
    assert!(n >= 1, "need at least one step");
    match mode {
        PhaseMode::Single(x0) => {
            let (half, full, renorms) = orbit_lognorms(fam, x0, n);
            let value = full / n as f64;
            let half_value = if n / 2 > 0 { half / (n / 2) as f64 } else { value };
            LyapunovEstimate {
                value,
                n,
                phase_mode: mode,
                renorm_count: renorms,
                half_orbit_gap: (value - half_value).abs(),
            }
        }
        PhaseMode::GridAveraged(m) => {
            assert!(m >= 1);
            let rows: Vec<(f64, f64, usize)> = (0..m)
                .into_par_iter()
                .map(|j| orbit_lognorms(fam, j as f64 / m as f64, n))
                .collect();
            let halves: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let fulls: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let renorms = rows.iter().map(|r| r.2).sum();
            let value = tree_sum(&fulls) / (m * n) as f64;
            let half_value = if n / 2 > 0 {
                tree_sum(&halves) / (m * (n / 2)) as f64
            } else {
                value
            };
            LyapunovEstimate {
                value,
                n,
                phase_mode: mode,
                renorm_count: renorms,
                half_orbit_gap: (value - half_value).abs(),
            }
        }
    }
}

/// Exact-at-rational-frequency exponent
/// L(p/q) = (1/q) * integral of ln(spectral radius of the q-step product).
/// The quadrature is the uniform periodic trapezoid rule.
pub fn le_rational(fam: &CocycleFamily, p: u64, q: u64, quad_points: usize) -> f64 {
    assert!(q >= 1 && quad_points >= 1);
    let fam = fam.with_alpha(p as f64 / q as f64);
    let vals: Vec<f64> = (0..quad_points)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 / quad_points as f64;
            let (b, log) = fam.iterate(x, q as i64);
            // det A_q = 1 forces the spectral radius >= 1; clamp rounding.
            (log + spectral_radius(&b).ln()).max(0.0)
        })
        .collect();
    tree_sum(&vals) / (quad_points as f64 * q as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct YProfile {
    pub heights: Vec<f64>,
    pub values: Vec<f64>,
    pub n: usize,
    /// Largest violation of slope monotonicity (0 for a convex profile).
    pub convexity_residual: f64,
    /// Max deviation from the least-squares line through the points with the
    /// smallest |y|.
    pub affine_residual_near_zero: f64,
}

fn least_squares_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return (0.0, sy / n);
    }
    let slope = (n * sxy - sx * sy) / denom;
    (slope, (sy - slope * sx) / n)
}

/// L as a function of the complexification height, shared orbit length.
pub fn y_profile(
    fam: &CocycleFamily,
    heights: &[f64],
    n: usize,
    mode: PhaseMode,
) -> Result<YProfile> {
    if heights.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CocycleError::Invalid {
            what: "heights must be strictly increasing".into(),
        });
    }
    let values: Vec<f64> = heights
        .iter()
        .map(|&y| Ok(le_iterate(&fam.with_height(y)?, n, mode).value))
        .collect::<Result<_>>()?;

    let mut convexity_residual: f64 = 0.0;
    for i in 0..heights.len().saturating_sub(2) {
        let s0 = (values[i + 1] - values[i]) / (heights[i + 1] - heights[i]);
        let s1 = (values[i + 2] - values[i + 1]) / (heights[i + 2] - heights[i + 1]);
        convexity_residual = convexity_residual.max(s0 - s1);
    }

    // Affinity near zero: the points with smallest |y| (up to four).
    let mut idx: Vec<usize> = (0..heights.len()).collect();
    idx.sort_by(|&i, &j| heights[i].abs().partial_cmp(&heights[j].abs()).unwrap());
    idx.truncate(4.min(heights.len()));
    let xs: Vec<f64> = idx.iter().map(|&i| heights[i]).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
    let (slope, icpt) = least_squares_line(&xs, &ys);
    let affine_residual_near_zero = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (slope * x + icpt)).abs())
        .fold(0.0f64, f64::max);

    Ok(YProfile {
        heights: heights.to_vec(),
        values,
        n,
        convexity_residual,
        affine_residual_near_zero,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AccelerationEstimate {
    pub slope_over_2pi: f64,
    pub nearest_integer: i64,
    pub deviation: f64,
}

/// Least-squares slope of the profile divided by 2 pi, with the nearest
/// integer reported alongside the raw value (never silently rounded).
pub fn acceleration_fd(profile: &YProfile) -> Result<AccelerationEstimate> {
    if profile.heights.len() < 3 {
        return Err(CocycleError::Invalid {
            what: "need at least three heights".into(),
        });
    }
    let span = profile.heights.last().unwrap() - profile.heights.first().unwrap();
    if span < 1e-4 {
        return Err(CocycleError::DegenerateProfile { span });
    }
    let (slope, _) = least_squares_line(&profile.heights, &profile.values);
    let slope_over_2pi = slope / TAU;
    let nearest_integer = slope_over_2pi.round() as i64;
    Ok(AccelerationEstimate {
        slope_over_2pi,
        nearest_integer,
        deviation: (slope_over_2pi - nearest_integer as f64).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regularity {
    Regular,
    Nonregular,
    Inconclusive,
}

/// Affinity of y -> L(A_y) across symmetric heights around 0. An affine
/// profile marks the exponent as regular at this point; a pronounced kink
/// marks it nonregular.
pub fn regularity_test(
    fam: &CocycleFamily,
    heights_near_zero: &[f64],
    n: usize,
    mode: PhaseMode,
) -> Result<Regularity> {
    let profile = y_profile(fam, heights_near_zero, n, mode)?;
    let (slope, icpt) = least_squares_line(&profile.heights, &profile.values);
    let residual = profile
        .heights
        .iter()
        .zip(&profile.values)
        .map(|(x, y)| (y - (slope * x + icpt)).abs())
        .fold(0.0f64, f64::max);
    Ok(if residual <= 3e-3 {
        Regularity::Regular
    } else if residual >= 3e-2 {
        Regularity::Nonregular
    } else {
        Regularity::Inconclusive
    })
}

/// Uniform periodic trapezoid quadrature of g over [0,1), doubling from
/// `start` points until the value moves by less than 1e-6.
pub fn circle_quadrature(g: impl Fn(f64) -> f64 + Sync, start: usize) -> f64 {
    let eval = |m: usize| -> f64 {
        let vals: Vec<f64> = (0..m)
            .into_par_iter()
            .map(|i| g(i as f64 / m as f64))
            .collect();
        tree_sum(&vals) / m as f64
    };
    let mut m = start.max(2);
    let mut prev = eval(m);
    for _ in 0..8 {
        m *= 2;
        let next = eval(m);
        if (next - prev).abs() < 1e-6 {
            return next;
        }
        prev = next;
    }
    prev
}

/// Both sides of the rotation-averaged norm identity
/// mean_theta L(x -> B(x) R_theta) = mean_x ln((||B|| + ||B||^{-1})/2).
pub fn hab_verify(b_fam: &CocycleFamily, theta_grid: usize, n: usize) -> (f64, f64) {
    let alpha = b_fam.alpha();
    let lhs_vals: Vec<f64> = (0..theta_grid)
        .into_par_iter()
        .map(|j| {
            let theta = j as f64 / theta_grid as f64;
            let r = Mat2C::rotation(theta);
            let mut m = Mat2C::identity();
            let mut log = 0.0;
            let mut phase = 0.0f64;
            for _ in 0..n {
                m = b_fam.evaluate(phase).mul(&r).mul(&m);
                let s = m.singular_norm();
                if s > 2.0 {
                    m = m.scale(crate::mat2::c64(1.0 / s, 0.0));
                    log += s.ln();
                }
                phase = frac(phase + alpha);
            }
            (log + m.singular_norm().ln()) / n as f64
        })
        .collect();
    let lhs = tree_sum(&lhs_vals) / theta_grid as f64;
    let rhs = circle_quadrature(
        |x| {
            let norm = b_fam.evaluate(x).singular_norm();
            ((norm + 1.0 / norm) / 2.0).ln()
        },
        64,
    );
    (lhs, rhs)
}

/// Both sides of the spectral-parameter-averaged identity for the
/// Verblunsky-driven family: mean_t L(t) = -(1/2) mean_x ln(1 - |f(x)|^2).
pub fn prop1_verify(
    pot: &SzegoPotential,
    alpha: f64,
    theta_grid: usize,
    n: usize,
) -> (f64, f64) {
    let lhs_vals: Vec<f64> = (0..theta_grid)
        .into_par_iter()
        .map(|j| {
            let t = j as f64 / theta_grid as f64;
            let fam = CocycleFamily::szego(pot.clone(), t, alpha, 0.0)
                .expect("potential validated by construction");
            le_iterate(&fam, n, PhaseMode::Single(0.0)).value
        })
        .collect();
    let lhs = tree_sum(&lhs_vals) / theta_grid as f64;
    let rhs = circle_quadrature(
        |x| {
            let f = pot.f(crate::mat2::c64(x, 0.0));
            -0.5 * (1.0 - f.norm_sqr()).ln()
        },
        64,
    );
    (lhs, rhs)
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuedFraction {
    pub partial_quotients: Vec<u64>,
    /// Convergents (p_n, q_n), starting at n = 1.
    pub convergents: Vec<(u128, u128)>,
    /// Sum of ln(q_{n+1}) / q_n over the computed depth.
    pub brjuno_partial: f64,
    /// Max of ln(q_{n+1}) / q_n over the computed depth (lim sup proxy;
    /// an estimate, not the true limit).
    pub beta_estimate: f64,
    pub rational_termination: bool,
}

/// Continued-fraction expansion of alpha in (0,1) with exact integer
/// convergents, to the requested depth or until rational termination.
pub fn cf_profile(alpha: f64, depth: usize) -> ContinuedFraction {
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must be in (0,1)");
    let mut quotients = Vec::new();
    let mut convergents: Vec<(u128, u128)> = Vec::new();
    let (mut p_prev, mut q_prev): (u128, u128) = (1, 0);
    let (mut p_cur, mut q_cur): (u128, u128) = (0, 1);
    let mut x = alpha;
    let mut rational = false;
    for _ in 0..depth {
        let inv = 1.0 / x;
        let a = inv.floor();
        if a >= 1e14 {
            // Remainder indistinguishable from 0 at double precision.
            rational = true;
            break;
        }
        let a_int = a as u128;
        let (p_next, q_next) = (
            a_int.saturating_mul(p_cur).saturating_add(p_prev),
            a_int.saturating_mul(q_cur).saturating_add(q_prev),
        );
        quotients.push(a_int as u64);
        convergents.push((p_next, q_next));
        p_prev = p_cur;
        q_prev = q_cur;
        p_cur = p_next;
        q_cur = q_next;
        x = inv - a;
        if x <= 0.0 {
            rational = true;
            break;
        }
    }
    let mut brjuno = 0.0;
    let mut beta: f64 = 0.0;
    for w in convergents.windows(2) {
        let (q_n, q_n1) = (w[0].1 as f64, w[1].1 as f64);
        let term = q_n1.ln() / q_n;
        brjuno += term;
        beta = beta.max(term);
    }
    ContinuedFraction {
        partial_quotients: quotients,
        convergents,
        brjuno_partial: brjuno,
        beta_estimate: beta,
        rational_termination: rational,
    }
}
