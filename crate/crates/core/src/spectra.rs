//! Parameter-space scans and operator oracles. A 1-D scan classifies each
//! spectral parameter as certified uniformly hyperbolic, a nonuniformly
//! hyperbolic candidate (certificate fails but the exponent is positive),
//! or undecided; the non-certified region approximates the spectrum.
//! Measure estimates back the large-coupling scans, and finite Schrödinger
//! and CMV truncations give independent spectral cross-checks.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CocycleError, Result};
use crate::families::{AnalyticCircleFunction, CocycleFamily, FamilySpec};
use crate::hyperbolicity::{cone_certify, CertOutcome, MarginPolicy};
use crate::lyapunov::{le_iterate, PhaseMode};
use crate::mat2::{c64, C64};
use crate::{frac, GOLDEN_MEAN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScanClass {
    UhCertified,
    NuhCandidate,
    Undecided,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanResult {
    /// Name of the scanned parameter ("t" or "E").
    pub axis: String,
    pub grid: Vec<f64>,
    pub class_of: Vec<ScanClass>,
    pub le_of: Vec<f64>,
    /// Certified exponent lower bound where certification succeeded.
    pub bound_of: Vec<Option<f64>>,
    pub config_hash: u64,
}

impl ScanResult {
    pub fn non_certified_count(&self) -> usize {
        self.class_of
            .iter()
            .filter(|c| **c != ScanClass::UhCertified)
            .count()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasureEstimate {
    /// Lebesgue measure estimate: grid fraction times domain length.
    pub value: f64,
    pub grid_step: f64,
    /// Change of the estimate against the even-index half grid.
    pub refinement_delta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanConfig {
    /// Heights at which certification is attempted; a certificate counts
    /// toward UhCertified only at height 0.
    pub heights: Vec<f64>,
    pub cert_grid: usize,
    pub le_n: usize,
    pub le_mode: PhaseMode,
    /// Exponent positivity floor for the NUH classification.
    pub nuh_threshold: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            heights: vec![0.0],
            cert_grid: 256,
            le_n: 100_000,
            le_mode: PhaseMode::Single(0.0),
            nuh_threshold: 0.02,
        }
    }
}

/// FNV-1a over a canonical parameter string; stable across runs.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn scan_hash(axis: &str, grid: &[f64], cfg: &ScanConfig, alpha: f64, y: f64) -> u64 {
    let mut s = format!(
        "{axis};{alpha:.17e};{y:.17e};{};{};{:?};{:.17e};",
        cfg.cert_grid, cfg.le_n, cfg.le_mode, cfg.nuh_threshold
    );
    for g in grid {
        s.push_str(&format!("{g:.17e},"));
    }
    fnv1a(s.as_bytes())
}

/// Classify each grid value of the spectral parameter. A point is
/// UhCertified when the cone certificate succeeds at height 0; otherwise
/// the measured exponent decides between NuhCandidate and Undecided.
/// Per-point failures never abort the scan; they land in Undecided.
pub fn scan_uh(
    template: &CocycleFamily,
    axis: &str,
    grid: &[f64],
    cfg: &ScanConfig,
) -> ScanResult {
    assert!(!grid.is_empty());
    let rows: Vec<(ScanClass, f64, Option<f64>)> = grid
        .par_iter()
        .map(|&value| {
            let fam = template.with_spectral(value);
            let mut class = ScanClass::Undecided;
            let mut bound = None;
            for &y in &cfg.heights {
                let at_y = if y == fam.y() {
                    Ok(fam.clone())
                } else {
                    fam.with_height(y)
                };
                let Ok(at_y) = at_y else { continue };
                if let CertOutcome::Certified(cert) =
                    cone_certify(&at_y, cfg.cert_grid, MarginPolicy::MeasuredLipschitz)
                {
                    if y == 0.0 {
                        class = ScanClass::UhCertified;
                        bound = Some(cert.le_lower_bound);
                        break;
                    }
                }
            }
            let le = le_iterate(&fam, cfg.le_n, cfg.le_mode).value;
            if class != ScanClass::UhCertified && le > cfg.nuh_threshold {
                class = ScanClass::NuhCandidate;
            }
            (class, le, bound)
        })
        .collect();
    let mut class_of = Vec::with_capacity(grid.len());
    let mut le_of = Vec::with_capacity(grid.len());
    let mut bound_of = Vec::with_capacity(grid.len());
    for (c, l, b) in rows {
        class_of.push(c);
        le_of.push(l);
        bound_of.push(b);
    }
    ScanResult {
        axis: axis.to_string(),
        grid: grid.to_vec(),
        class_of,
        le_of,
        bound_of,
        config_hash: scan_hash(axis, grid, cfg, template.alpha(), template.y()),
    }
}

fn grid_step(grid: &[f64]) -> f64 {
    if grid.len() < 2 {
        return 0.0;
    }
    grid[1] - grid[0]
}

/// Measure of the points selected by `keep`, with an even-index
/// half-grid comparison as the refinement diagnostic.
fn measure_of<F: Fn(usize) -> bool>(grid: &[f64], keep: F) -> MeasureEstimate {
    let step = grid_step(grid);
    let n = grid.len();
    let full = (0..n).filter(|&i| keep(i)).count() as f64 * step;
    let half_idx: Vec<usize> = (0..n).step_by(2).collect();
    let half = half_idx.iter().filter(|&&i| keep(i)).count() as f64 * step
        * (n as f64 / half_idx.len() as f64);
    MeasureEstimate { value: full, grid_step: step, refinement_delta: (full - half).abs() }
}

/// Grid fraction of non-certified points times domain length: the spectrum
/// approximation of a 1-D scan.
pub fn spectrum_measure(scan: &ScanResult) -> MeasureEstimate {
    measure_of(&scan.grid, |i| scan.class_of[i] != ScanClass::UhCertified)
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaScan {
    pub scan: ScanResult,
    pub measure: MeasureEstimate,
    /// Threshold actually used for the exponent condition.
    pub threshold: f64,
    /// The nominal (1 - eps) ln(lambda) value, reported for comparison;
    /// for couplings below 1 it is negative and not used.
    pub literal_threshold: f64,
}

fn coupling_of(fam: &CocycleFamily) -> Option<f64> {
    match fam.spec() {
        FamilySpec::Szego { potential, .. } => Some(potential.lambda),
        FamilySpec::Schrodinger { lambda, .. }
        | FamilySpec::SchrodingerShifted { lambda, .. } => Some(*lambda),
        _ => None,
    }
}

/// Scan of the set of spectral parameters t with a failing certificate and
/// L above the large-coupling threshold. For couplings above 1
/// (Schrödinger kinds) the threshold is max((1-eps) ln lambda, 0.02); for
/// the coupling-below-1 kind the natural scale is -(1-eps) (1/2) ln(1-lambda)
/// and the nominal (1-eps) ln lambda is only reported.
pub fn delta_epsilon_scan(
    template: &CocycleFamily,
    epsilon: f64,
    t_grid: &[f64],
    cfg: &ScanConfig,
) -> Result<DeltaScan> {
    if !(0.0..1.0).contains(&epsilon) || epsilon == 0.0 {
        return Err(CocycleError::BadEpsilon { epsilon });
    }
    let lambda = coupling_of(template).ok_or_else(|| CocycleError::Invalid {
        what: "delta scan needs a family with a coupling".into(),
    })?;
    let literal = (1.0 - epsilon) * lambda.ln();
    let threshold = if lambda > 1.0 {
        literal.max(0.02)
    } else {
        -(1.0 - epsilon) * 0.5 * (1.0 - lambda).ln()
    };
    let cfg = ScanConfig { nuh_threshold: threshold, ..cfg.clone() };
    let scan = scan_uh(template, "t", t_grid, &cfg);
    let measure = measure_of(&scan.grid, |i| scan.class_of[i] == ScanClass::NuhCandidate);
    Ok(DeltaScan { scan, measure, threshold, literal_threshold: literal })
}

/// Frequencies frac(golden + j/n): an equidistributed rational-free grid.
pub fn golden_alpha_grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| frac(GOLDEN_MEAN + j as f64 / n as f64)).collect()
}

/// 2-D measure over (alpha, t): the mean over the alpha grid of the per
/// alpha delta-scan measures.
pub fn gamma_epsilon_scan(
    template: &CocycleFamily,
    epsilon: f64,
    alpha_grid: &[f64],
    t_grid: &[f64],
    cfg: &ScanConfig,
) -> Result<MeasureEstimate> {
    if alpha_grid.is_empty() || t_grid.is_empty() {
        return Ok(MeasureEstimate { value: 0.0, grid_step: 0.0, refinement_delta: 0.0 });
    }
    let mut total = 0.0;
    let mut delta = 0.0f64;
    let mut step = 0.0;
    for &alpha in alpha_grid {
        let d = delta_epsilon_scan(&template.with_alpha(alpha), epsilon, t_grid, cfg)?;
        total += d.measure.value;
        delta = delta.max(d.measure.refinement_delta);
        step = d.measure.grid_step;
    }
    Ok(MeasureEstimate {
        value: total / alpha_grid.len() as f64,
        grid_step: step,
        refinement_delta: delta,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct YoungRow {
    pub t: f64,
    pub zero_count: usize,
    /// min |dc/dx| over the detected zeros.
    pub transversality: f64,
    /// Min pairwise separation of (dc/dt)/(dc/dx) across zeros.
    pub injectivity: f64,
    pub zeros_exist: bool,
    pub transversal: bool,
    pub values_distinct: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct YoungReport {
    pub rows: Vec<YoungRow>,
    /// t values failing at least one of the three conditions.
    pub offending_t: Vec<f64>,
}

/// Check the three zero-set hypotheses of the large-coupling measure
/// theorem for a real function c(x, t): zeros exist and are finitely many,
/// the zeros are transversal in x, and the induced slope values separate
/// the zeros. Report-only; nothing fails hard.
pub fn young_hypotheses_check<F>(c_fn: F, t_grid: &[f64], x_samples: usize) -> YoungReport
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    const DERIV_TOL: f64 = 1e-6;
    let h = 1.0 / x_samples as f64;
    let rows: Vec<YoungRow> = t_grid
        .par_iter()
        .map(|&t| {
            let vals: Vec<f64> = (0..x_samples)
                .map(|i| c_fn(i as f64 * h, t))
                .collect();
            let near_zero = vals.iter().filter(|v| v.abs() < 1e-12).count();
            let mut zeros = Vec::new();
            for i in 0..x_samples {
                let (a, b) = (vals[i], vals[(i + 1) % x_samples]);
                if a == 0.0 || (a < 0.0) != (b < 0.0) {
                    // Linear interpolation of the crossing.
                    let frac_in = if a == 0.0 { 0.0 } else { a / (a - b) };
                    zeros.push(frac((i as f64 + frac_in) * h));
                }
            }
            let dx = |x: f64| (c_fn(frac(x + h), t) - c_fn(frac(x - h), t)) / (2.0 * h);
            let dt = |x: f64| (c_fn(x, t + h) - c_fn(x, t - h)) / (2.0 * h);
            let transversality = zeros
                .iter()
                .map(|&x| dx(x).abs())
                .fold(f64::INFINITY, f64::min);
            let slopes: Vec<f64> = zeros
                .iter()
                .map(|&x| {
                    let d = dx(x);
                    if d.abs() < 1e-300 { f64::INFINITY } else { dt(x) / d }
                })
                .collect();
            let mut injectivity = f64::INFINITY;
            for i in 0..slopes.len() {
                for j in i + 1..slopes.len() {
                    injectivity = injectivity.min((slopes[i] - slopes[j]).abs());
                }
            }
            // A plateau of exact zeros means the zero set is not finite.
            let zeros_exist = !zeros.is_empty() && near_zero < x_samples / 20;
            YoungRow {
                t,
                zero_count: zeros.len(),
                transversality,
                injectivity,
                zeros_exist,
                transversal: zeros_exist && transversality > DERIV_TOL,
                values_distinct: zeros_exist
                    && (zeros.len() < 2 || injectivity > DERIV_TOL),
            }
        })
        .collect();
    let offending_t = rows
        .iter()
        .filter(|r| !(r.zeros_exist && r.transversal && r.values_distinct))
        .map(|r| r.t)
        .collect();
    YoungReport { rows, offending_t }
}

/// Large-coupling limit shape of the reduced upper-left entry for the
/// unimodular kind: cos(pi [theta(x) - theta(x-alpha) + k alpha + t]).
pub fn szego_young_c(
    theta: &AnalyticCircleFunction,
    k: i64,
    alpha: f64,
) -> impl Fn(f64, f64) -> f64 + Sync + '_ {
    move |x, t| {
        let d = theta.eval_real(x).re - theta.eval_real(frac(x - alpha)).re;
        (std::f64::consts::PI * (d + k as f64 * alpha + t)).cos()
    }
}

/// Large-coupling limit for the shifted kind: t - v(x - alpha).
pub fn schrodinger_young_c(
    v: &AnalyticCircleFunction,
    alpha: f64,
) -> impl Fn(f64, f64) -> f64 + Sync + '_ {
    move |x, t| t - v.eval_real(frac(x - alpha)).re
}

#[derive(Debug, Clone)]
pub enum TruncatedOperator {
    Schrodinger {
        n: usize,
        diagonal: Vec<f64>,
        /// Sorted ascending.
        eigenvalues: Vec<f64>,
    },
    Cmv {
        n: usize,
        matrix: DMatrix<C64>,
        eigenvalues: Vec<C64>,
        /// max |(C*C - I)_{jk}|.
        unitarity_defect: f64,
    },
}

impl TruncatedOperator {
    pub fn real_eigenvalues(&self) -> Option<&[f64]> {
        match self {
            TruncatedOperator::Schrodinger { eigenvalues, .. } => Some(eigenvalues),
            _ => None,
        }
    }

    pub fn circle_eigenvalues(&self) -> Option<&[C64]> {
        match self {
            TruncatedOperator::Cmv { eigenvalues, .. } => Some(eigenvalues),
            _ => None,
        }
    }
}

/// N x N Dirichlet section of u -> u_{n+1} + u_{n-1} + lambda v(x0 + n alpha) u_n.
pub fn schrodinger_truncation(
    v: &AnalyticCircleFunction,
    lambda: f64,
    alpha: f64,
    x0: f64,
    n: usize,
) -> TruncatedOperator {
    assert!(n >= 2);
    let diagonal: Vec<f64> = (0..n)
        .map(|j| lambda * v.eval_real(frac(x0 + j as f64 * alpha)).re)
        .collect();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        m[(j, j)] = diagonal[j];
        if j + 1 < n {
            m[(j, j + 1)] = 1.0;
            m[(j + 1, j)] = 1.0;
        }
    }
    let mut eigenvalues: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().cloned().collect();
    eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());
    TruncatedOperator::Schrodinger { n, diagonal, eigenvalues }
}

/// Finite CMV section C = L M from 2x2 blocks
/// Theta(alpha_j) = [[conj(alpha_j), rho_j], [rho_j, -alpha_j]]; the final
/// coefficient must be unimodular, which closes the section to an exactly
/// unitary matrix.
pub fn cmv_truncation(verblunsky: &[C64]) -> Result<TruncatedOperator> {
    let n = verblunsky.len();
    if n == 0 {
        return Err(CocycleError::Invalid { what: "empty Verblunsky list".into() });
    }
    for (j, a) in verblunsky.iter().enumerate() {
        let modulus = a.norm();
        let bad = if j + 1 == n {
            (modulus - 1.0).abs() > 1e-9
        } else {
            modulus >= 1.0
        };
        if bad {
            return Err(CocycleError::BadVerblunsky { index: j, modulus });
        }
    }

    // Place Theta(alpha_j) at rows/cols (j, j+1): even j into L, odd j
    // into M (M also gets the leading 1x1 identity). The index n-1 block
    // degenerates to the scalar conj(alpha_{n-1}).
    let mut l = DMatrix::<C64>::identity(n, n);
    let mut m = DMatrix::<C64>::identity(n, n);
    for j in 0..n {
        let target = if j % 2 == 0 { &mut l } else { &mut m };
        let a = verblunsky[j];
        if j + 1 == n {
            target[(j, j)] = a.conj();
        } else {
            let rho = c64((1.0 - a.norm_sqr()).max(0.0).sqrt(), 0.0);
            target[(j, j)] = a.conj();
            target[(j, j + 1)] = rho;
            target[(j + 1, j)] = rho;
            target[(j + 1, j + 1)] = -a;
        }
    }
    let c = &l * &m;

    let defect = (c.adjoint() * &c - DMatrix::<C64>::identity(n, n))
        .iter()
        .map(|e| e.norm())
        .fold(0.0f64, f64::max);

    let eigenvalues: Vec<C64> = if n == 1 {
        vec![c[(0, 0)]]
    } else {
        let (_, t) = c.clone().schur().unpack();
        (0..n).map(|j| t[(j, j)]).collect()
    };
    Ok(TruncatedOperator::Cmv { n, matrix: c, eigenvalues, unitarity_defect: defect })
}

/// Verblunsky input for [`cmv_truncation`] from a potential orbit, with the
/// final coefficient replaced by 1 to close the section.
pub fn verblunsky_orbit<F: Fn(f64) -> C64>(f: F, x0: f64, alpha: f64, n: usize) -> Vec<C64> {
    let mut out: Vec<C64> = (0..n).map(|j| f(frac(x0 + j as f64 * alpha))).collect();
    if let Some(last) = out.last_mut() {
        *last = C64::ONE;
    }
    out
}
