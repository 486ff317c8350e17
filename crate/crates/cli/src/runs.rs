//! Subcommand bodies. Each builds its inputs from the config, calls into
//! the core crate, and emits CSV + JSON through a Reporter. Output writing
//! stays single threaded and ordered; any parallelism lives in the core.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::json;

use qpcocycle::families::CocycleFamily;
use qpcocycle::hyperbolicity::{cone_certify, CertOutcome, MarginPolicy};
use qpcocycle::lyapunov::{acceleration_fd, hab_verify, le_iterate, prop1_verify, y_profile, PhaseMode};
use qpcocycle::mat2::{c64, Mat2C};
use qpcocycle::opuc::{measure_density, szego_evolve};
use qpcocycle::spectra::{
    cmv_truncation, scan_uh, schrodinger_truncation, spectrum_measure, verblunsky_orbit,
    ScanConfig, TruncatedOperator,
};

use crate::config::{ConfigError, ExperimentConfig};
use crate::report::{fmt_f64, Reporter};

#[derive(Debug)]
pub enum RunError {
    /// Bad or inconsistent config; exit code 2.
    Config(String),
    /// Numerical or IO failure after validation; exit code 3.
    Numeric(String),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e.to_string())
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Numeric(format!("io error: {e}"))
    }
}

impl From<qpcocycle::CocycleError> for RunError {
    fn from(e: qpcocycle::CocycleError) -> Self {
        RunError::Numeric(e.to_string())
    }
}

type RunResult = Result<(), RunError>;

fn phase_mode(cfg: &ExperimentConfig, section: &str, scale: usize) -> Result<PhaseMode, RunError> {
    match cfg.get(section, "mode").unwrap_or("single") {
        "single" => Ok(PhaseMode::Single(cfg.f64_or(section, "phase", 0.0)?)),
        "grid" => Ok(PhaseMode::GridAveraged(cfg.usize_or(section, "phase_grid", 32)? * scale)),
        other => Err(RunError::Config(format!("{section}.mode: unknown mode `{other}`"))),
    }
}

pub fn lyapunov(cfg: &ExperimentConfig, out: &Path, scale: usize) -> RunResult {
    let fam = cfg.family()?;
    let n = cfg.usize_or("lyapunov", "n", 100_000)?;
    let mode = phase_mode(cfg, "lyapunov", scale)?;
    let est = le_iterate(&fam, n, mode);
    let mut rep = Reporter::new(out)?;
    rep.csv(
        "lyapunov.csv",
        &["n", "mode", "value"],
        &[vec![n.to_string(), format!("{mode:?}"), fmt_f64(est.value)]],
    )?;
    rep.json("summary.json", &json!({ "value": est.value, "n": n, "mode": format!("{mode:?}") }))?;
    rep.finish(&cfg.serialize(), BTreeMap::new())?;
    Ok(())
}

pub fn accelerate(cfg: &ExperimentConfig, out: &Path, scale: usize) -> RunResult {
    let fam = cfg.family()?;
    let mut heights = cfg.f64_list("accelerate", "heights")?;
    if heights.is_empty() {
        heights = (1..=4).map(|j| 0.4 / 64.0 * j as f64).collect();
    }
    let n = cfg.usize_or("accelerate", "n", 50_000)?;
    let mode = phase_mode(cfg, "accelerate", scale)?;
    let profile = y_profile(&fam, &heights, n, mode)?;
    let acc = acceleration_fd(&profile)?;
    let mut rep = Reporter::new(out)?;
    let rows: Vec<Vec<String>> = profile
        .heights
        .iter()
        .zip(&profile.values)
        .map(|(y, l)| vec![fmt_f64(*y), fmt_f64(*l)])
        .collect();
    rep.csv("profile.csv", &["y", "le"], &rows)?;
    rep.json(
        "summary.json",
        &json!({
            "slope_over_2pi": acc.slope_over_2pi,
            "nearest_integer": acc.nearest_integer,
            "deviation": acc.deviation,
            "convexity_residual": profile.convexity_residual,
            "n": n,
            "heights": heights,
        }),
    )?;
    rep.finish(&cfg.serialize(), BTreeMap::new())?;
    Ok(())
}

pub fn certify(cfg: &ExperimentConfig, out: &Path, scale: usize) -> RunResult {
    let fam = cfg.family()?;
    let grid = cfg.usize_or("certify", "grid", 256)? * scale;
    let policy = match cfg.get("certify", "margin").unwrap_or("measured") {
        "measured" => MarginPolicy::MeasuredLipschitz,
        "none" => MarginPolicy::None,
        other => return Err(RunError::Config(format!("certify.margin: unknown policy `{other}`"))),
    };
    let outcome = cone_certify(&fam, grid, policy);
    let mut rep = Reporter::new(out)?;
    match &outcome {
        CertOutcome::Certified(c) => {
            rep.csv(
                "certificate.csv",
                &["grid", "gamma", "rho", "lam_hat", "le_lower_bound", "margin", "label"],
                &[vec![
                    c.grid_size.to_string(),
                    fmt_f64(c.gamma),
                    fmt_f64(c.rho),
                    fmt_f64(c.lam_hat),
                    fmt_f64(c.le_lower_bound),
                    fmt_f64(c.margin),
                    c.label.to_string(),
                ]],
            )?;
            rep.json(
                "summary.json",
                &json!({ "certified": true, "certificate": c, "grid": grid }),
            )?;
        }
        CertOutcome::Failed(reason) => {
            rep.csv("certificate.csv", &["grid", "gamma", "rho", "lam_hat", "le_lower_bound", "margin", "label"], &[])?;
            rep.json(
                "summary.json",
                &json!({ "certified": false, "reason": format!("{reason:?}"), "grid": grid }),
            )?;
        }
    }
    rep.finish(&cfg.serialize(), BTreeMap::new())?;
    Ok(())
}

pub fn scan(cfg: &ExperimentConfig, out: &Path, scale: usize) -> RunResult {
    let fam = cfg.family()?;
    let lo = cfg.f64_or("scan", "lo", 0.0)?;
    let hi = cfg.f64_or("scan", "hi", 1.0)?;
    if hi <= lo {
        return Err(RunError::Config(format!("scan.hi: must exceed scan.lo, got [{lo}, {hi}]")));
    }
    let points = cfg.usize_or("scan", "points", 256)? * scale;
    if points < 2 {
        return Err(RunError::Config("scan.points: need at least 2".into()));
    }
    let axis = cfg.get("scan", "axis").unwrap_or("spectral").to_string();
    let mut sc = ScanConfig::default();
    sc.cert_grid = cfg.usize_or("scan", "cert_grid", sc.cert_grid)? * scale;
    sc.le_n = cfg.usize_or("scan", "le_n", sc.le_n)?;
    sc.nuh_threshold = cfg.f64_or("scan", "nuh_threshold", sc.nuh_threshold)?;
    let heights = cfg.f64_list("scan", "heights")?;
    if !heights.is_empty() {
        sc.heights = heights;
    }
    let grid: Vec<f64> =
        (0..points).map(|i| lo + (hi - lo) * i as f64 / points as f64).collect();
    let result = scan_uh(&fam, &axis, &grid, &sc);
    let measure = spectrum_measure(&result);
    let mut rep = Reporter::new(out)?;
    let rows: Vec<Vec<String>> = (0..grid.len())
        .map(|i| {
            vec![
                fmt_f64(grid[i]),
                format!("{:?}", result.class_of[i]),
                fmt_f64(result.le_of[i]),
                result.bound_of[i].map(fmt_f64).unwrap_or_default(),
            ]
        })
        .collect();
    rep.csv("scan.csv", &["value", "class", "le", "le_lower_bound"], &rows)?;
    rep.json(
        "summary.json",
        &json!({
            "axis": axis,
            "points": points,
            "cert_grid": sc.cert_grid,
            "le_n": sc.le_n,
            "nuh_threshold": sc.nuh_threshold,
            "non_certified": result.non_certified_count(),
            "spectrum_measure": measure,
            "config_hash": result.config_hash,
        }),
    )?;
    let mut deltas = BTreeMap::new();
    deltas.insert("spectrum_measure".to_string(), measure.refinement_delta);
    rep.finish(&cfg.serialize(), deltas)?;
    Ok(())
}

pub fn hab(cfg: &ExperimentConfig, out: &Path, scale: usize) -> RunResult {
    let alpha = cfg.f64_or("family", "alpha", qpcocycle::GOLDEN_MEAN)?;
    let b = cfg.f64_or("hab", "b", 2.0)?;
    if b <= 0.0 {
        return Err(RunError::Config(format!("hab.b: must be positive, got {b}")));
    }
    let fam = CocycleFamily::constant(Mat2C::diag(c64(b, 0.0), c64(1.0 / b, 0.0)), alpha)
        .map_err(|e| RunError::Config(format!("hab family: {e}")))?;
    let theta_grid = cfg.usize_or("hab", "theta_grid", 64)? * scale;
    let n = cfg.usize_or("hab", "n", 200_000)?;
    let (lhs, rhs) = hab_verify(&fam, theta_grid, n);
    let mut rep = Reporter::new(out)?;
    rep.csv(
        "hab.csv",
        &["theta_grid", "n", "mean_le", "closed_form"],
        &[vec![theta_grid.to_string(), n.to_string(), fmt_f64(lhs), fmt_f64(rhs)]],
    )?;
    rep.json(
        "summary.json",
        &json!({ "mean_le": lhs, "closed_form": rhs, "gap": (lhs - rhs).abs(),
                 "theta_grid": theta_grid, "n": n }),
    )?;
    rep.finish(&cfg.serialize(), BTreeMap::new())?;
    Ok(())
}

pub fn prop1(cfg: &ExperimentConfig, out: &Path, scale: usize) -> RunResult {
    let pot = cfg.szego_potential()?;
    let alpha = cfg.f64_or("family", "alpha", qpcocycle::GOLDEN_MEAN)?;
    let theta_grid = cfg.usize_or("prop1", "theta_grid", 64)? * scale;
    let n = cfg.usize_or("prop1", "n", 200_000)?;
    let (lhs, rhs) = prop1_verify(&pot, alpha, theta_grid, n);
    let mut rep = Reporter::new(out)?;
    rep.csv(
        "prop1.csv",
        &["theta_grid", "n", "mean_le", "closed_form"],
        &[vec![theta_grid.to_string(), n.to_string(), fmt_f64(lhs), fmt_f64(rhs)]],
    )?;
    rep.json(
        "summary.json",
        &json!({ "mean_le": lhs, "closed_form": rhs, "gap": (lhs - rhs).abs(),
                 "theta_grid": theta_grid, "n": n }),
    )?;
    rep.finish(&cfg.serialize(), BTreeMap::new())?;
    Ok(())
}

pub fn opuc(cfg: &ExperimentConfig, out: &Path, scale: usize) -> RunResult {
    let pot = cfg.szego_potential()?;
    let alpha = cfg.f64_or("family", "alpha", qpcocycle::GOLDEN_MEAN)?;
    let n = cfg.usize_or("opuc", "n", 32)?;
    let x0 = cfg.f64_or("opuc", "x0", 0.0)?;
    let grid = cfg.usize_or("opuc", "grid", 4096)? * scale;
    // The evolve step wants strictly contractive coefficients; no forced
    // unimodular tail here, unlike the CMV truncation.
    let orbit: Vec<_> = (0..n)
        .map(|j| pot.f(c64(qpcocycle::frac(x0 + j as f64 * alpha), 0.0)))
        .collect();
    let pair = szego_evolve(&orbit, n)?;
    let density = measure_density(&pair, grid)?;
    let mut rep = Reporter::new(out)?;
    let coeff_rows: Vec<Vec<String>> = orbit
        .iter()
        .enumerate()
        .map(|(j, a)| vec![j.to_string(), fmt_f64(a.re), fmt_f64(a.im)])
        .collect();
    rep.csv("coefficients.csv", &["j", "re", "im"], &coeff_rows)?;
    let density_rows: Vec<Vec<String>> = density
        .theta_grid
        .iter()
        .zip(&density.density)
        .map(|(t, d)| vec![fmt_f64(*t), fmt_f64(*d)])
        .collect();
    rep.csv("density.csv", &["theta", "density"], &density_rows)?;
    rep.json(
        "summary.json",
        &json!({ "n": n, "grid": grid, "total_mass": density.total, "x0": x0 }),
    )?;
    rep.finish(&cfg.serialize(), BTreeMap::new())?;
    Ok(())
}

pub fn truncation(cfg: &ExperimentConfig, out: &Path, scale: usize) -> RunResult {
    let kind = cfg.require("family", "kind")?;
    let alpha = cfg.f64_or("family", "alpha", qpcocycle::GOLDEN_MEAN)?;
    let n = cfg.usize_or("truncation", "n", 256)? * scale;
    let x0 = cfg.f64_or("truncation", "x0", 0.0)?;
    let mut rep = Reporter::new(out)?;
    match kind {
        "schrodinger" => {
            let lambda = cfg.f64_or("family", "lambda", 0.5)?;
            let op = schrodinger_truncation(&cfg.potential_fn()?, lambda, alpha, x0, n);
            let eigs = op.real_eigenvalues().expect("tridiagonal section");
            let rows: Vec<Vec<String>> = eigs
                .iter()
                .enumerate()
                .map(|(j, e)| vec![j.to_string(), fmt_f64(*e)])
                .collect();
            rep.csv("eigenvalues.csv", &["index", "value"], &rows)?;
            rep.json("summary.json", &json!({ "kind": "schrodinger", "n": n, "x0": x0 }))?;
        }
        "szego" => {
            let pot = cfg.szego_potential()?;
            let orbit = verblunsky_orbit(|x| pot.f(c64(x, 0.0)), x0, alpha, n);
            let op = cmv_truncation(&orbit)?;
            let TruncatedOperator::Cmv { unitarity_defect, .. } = &op else { unreachable!() };
            let defect = *unitarity_defect;
            let eigs = op.circle_eigenvalues().expect("cmv section");
            let rows: Vec<Vec<String>> = eigs
                .iter()
                .enumerate()
                .map(|(j, z)| vec![j.to_string(), fmt_f64(z.re), fmt_f64(z.im), fmt_f64(z.arg())])
                .collect();
            rep.csv("eigenvalues.csv", &["index", "re", "im", "arg"], &rows)?;
            rep.json(
                "summary.json",
                &json!({ "kind": "cmv", "n": n, "x0": x0, "unitarity_defect": defect }),
            )?;
        }
        other => {
            return Err(RunError::Config(format!(
                "family.kind: truncation supports szego | schrodinger, got `{other}`"
            )))
        }
    }
    rep.finish(&cfg.serialize(), BTreeMap::new())?;
    Ok(())
}
