//! Orthogonal polynomials on the unit circle driven by a Verblunsky orbit:
//! the coefficient-level Szegő recursion, reversed polynomials, the
//! Bernstein–Szegő probability densities 1/(2 pi |phi_n|^2), and the
//! Aleksandrov rotation of the coefficients.
//!
//! Convention: with rho_n = sqrt(1 - |a_n|^2),
//!   phi_{n+1} = (E phi_n - conj(a_n) phi_n^*) / rho_n,
//!   phi_{n+1}^* = (phi_n^* - a_n E phi_n) / rho_n,
//! which is the unit-determinant transfer matrix of the families module
//! multiplied by sqrt(E).

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CocycleError, Result};
use crate::mat2::C64;

const TAU: f64 = std::f64::consts::TAU;

/// Monic-normalized pair (phi_n, phi_n^*), stored densely by ascending
/// power of E.
#[derive(Debug, Clone, Serialize)]
pub struct PolyPair {
    pub phi: Vec<C64>,
    pub phi_star: Vec<C64>,
    pub n: usize,
}

/// Horner evaluation.
pub fn eval_poly(coeffs: &[C64], e: C64) -> C64 {
    coeffs.iter().rev().fold(C64::ZERO, |acc, &c| acc * e + c)
}

impl PolyPair {
    pub fn eval(&self, e: C64) -> (C64, C64) {
        (eval_poly(&self.phi, e), eval_poly(&self.phi_star, e))
    }

    pub fn leading(&self) -> C64 {
        *self.phi.last().unwrap()
    }
}

/// Run n steps of the Szegő recursion from phi_0 = phi_0^* = 1 with
/// Verblunsky coefficients f_orbit[0..n].
pub fn szego_evolve(f_orbit: &[C64], n: usize) -> Result<PolyPair> {
    assert!(f_orbit.len() >= n, "need {n} coefficients, got {}", f_orbit.len());
    for (index, a) in f_orbit[..n].iter().enumerate() {
        let modulus = a.norm();
        if modulus >= 1.0 {
            return Err(CocycleError::BadVerblunsky { index, modulus });
        }
    }
    let mut phi = vec![C64::ONE];
    let mut star = vec![C64::ONE];
    for &a in &f_orbit[..n] {
        let rho = (1.0 - a.norm_sqr()).sqrt();
        let deg = phi.len();
        // E * phi: shift by one power.
        let mut next_phi = vec![C64::ZERO; deg + 1];
        let mut next_star = vec![C64::ZERO; deg + 1];
        for j in 0..deg {
            next_phi[j + 1] = phi[j] / rho;
            next_star[j + 1] = -a * phi[j] / rho;
        }
        for j in 0..deg {
            next_phi[j] -= a.conj() * star[j] / rho;
            next_star[j] += star[j] / rho;
        }
        phi = next_phi;
        star = next_star;
    }
    Ok(PolyPair { phi, phi_star: star, n })
}

/// Q*(E) = E^n conj-reflect(Q): coefficient reversal with conjugation,
/// padding Q up to degree n.
pub fn reversed_polynomial(q: &[C64], n: usize) -> Vec<C64> {
    assert!(q.len() <= n + 1, "degree exceeds n");
    (0..=n)
        .map(|j| {
            let k = n - j;
            if k < q.len() { q[k].conj() } else { C64::ZERO }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct BernsteinSzegoMeasure {
    pub theta_grid: Vec<f64>,
    /// 1 / (2 pi |phi_n(e^{i theta})|^2) per node.
    pub density: Vec<f64>,
    /// Riemann quadrature of the density; 1 up to quadrature error.
    pub total: f64,
}

/// Tabulate the probability density of the measure with Verblunsky
/// coefficients (a_0, ..., a_{n-1}, 0, 0, ...).
pub fn measure_density(pair: &PolyPair, grid_size: usize) -> Result<BernsteinSzegoMeasure> {
    assert!(grid_size >= 2);
    let theta_grid: Vec<f64> = (0..grid_size).map(|j| TAU * j as f64 / grid_size as f64).collect();
    let density: Vec<f64> = theta_grid
        .par_iter()
        .enumerate()
        .map(|(node, &theta)| {
            let value = eval_poly(&pair.phi, C64::from_polar(1.0, theta)).norm();
            if value < 1e-12 {
                return Err(CocycleError::ZeroOnCircle { node, value });
            }
            Ok(1.0 / (TAU * value * value))
        })
        .collect::<Result<_>>()?;
    let total = crate::tree_sum(&density) * TAU / grid_size as f64;
    Ok(BernsteinSzegoMeasure { theta_grid, density, total })
}

/// Total mass by grid doubling until two successive totals agree to 1e-9.
/// Needed because zeros of phi_n can sit very close to the circle (constant
/// real coefficients drive one zero in exponentially fast), making the
/// density spike and fixed coarse grids unreliable. Returns the converged
/// total and the grid size used.
pub fn measure_total(pair: &PolyPair) -> Result<(f64, usize)> {
    let mut grid = 2048;
    let mut last = measure_density(pair, grid)?.total;
    while grid < (1 << 22) {
        grid *= 2;
        let next = measure_density(pair, grid)?.total;
        if (next - last).abs() < 1e-9 {
            return Ok((next, grid));
        }
        last = next;
    }
    Ok((last, grid))
}

/// Multiply every Verblunsky coefficient by a unimodular eta.
pub fn aleksandrov_rotate(f_orbit: &[C64], eta: C64) -> Result<Vec<C64>> {
    let modulus = eta.norm();
    if (modulus - 1.0).abs() > 1e-12 {
        return Err(CocycleError::BadEta { modulus });
    }
    Ok(f_orbit.iter().map(|&a| eta * a).collect())
}
