//! End-to-end runs of the binary: exit codes, report shape, parse-back
//! precision, and run-twice determinism of the emitted checksums.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qpcocycle"))
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("exp.cfg");
    std::fs::write(&path, text).unwrap();
    path
}

fn manifest_files(out: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    serde_json::from_str::<serde_json::Value>(&text).unwrap()["files"].clone()
}

const PROP1_MIN: &str = "\
[family]
kind = szego
lambda = 0.6

[prop1]
theta_grid = 8
n = 2000
";

#[test]
fn prop1_minimal_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), PROP1_MIN);
    let out1 = dir.path().join("run1");
    let out2 = dir.path().join("run2");
    for out in [&out1, &out2] {
        let status = bin().args(["prop1", "--config"]).arg(&cfg).arg("--out").arg(out).status().unwrap();
        assert!(status.success());
        assert!(out.join("prop1.csv").exists());
        assert!(out.join("summary.json").exists());
    }
    assert_eq!(manifest_files(&out1), manifest_files(&out2));
    // Constant f = 0.6: mean exponent equals -0.5 ln(1 - 0.36) exactly in
    // the closed form and to orbit accuracy in the estimate.
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out1.join("summary.json")).unwrap()).unwrap();
    let rhs = summary["closed_form"].as_f64().unwrap();
    assert!((rhs + 0.5 * (1.0f64 - 0.36).ln()).abs() < 1e-12);
}

#[test]
fn szego_coupling_out_of_range_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[family]\nkind = szego\nlambda = 1.5\n\n[lyapunov]\nn = 100\n",
    );
    let out = bin()
        .args(["lyapunov", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("family.lambda"), "{stderr}");
}

#[test]
fn unknown_subcommand_exits_2_with_usage() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("Usage"), "{stderr}");
}

#[test]
fn missing_config_exits_2() {
    let out = bin().args(["lyapunov", "--config", "/nonexistent/x.cfg"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scan_csv_parses_back_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[family]\nkind = schrodinger\nlambda = 2.0\ne = 0.0\n\n\
         [potential]\ncosine_amp = 1.0\n\n\
         [scan]\naxis = E\nlo = 5.0\nhi = 7.0\npoints = 16\ncert_grid = 64\nle_n = 2000\n",
    );
    let out = dir.path().join("out");
    let status = bin().args(["scan", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(out.join("scan.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "value,class,le,le_lower_bound");
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 4);
        let value: f64 = cols[0].parse().unwrap();
        let expect = 5.0 + 2.0 * i as f64 / 16.0;
        assert_eq!(value, expect, "grid value not bit exact");
        // Reprinting the parsed float must reproduce the field.
        assert_eq!(format!("{:.16e}", cols[2].parse::<f64>().unwrap()), cols[2]);
        rows += 1;
    }
    assert_eq!(rows, 16);
    // E = 6 with lambda = 2 sits outside the spectrum; expect certificates.
    assert!(text.contains("UhCertified"));
}

#[test]
fn grid_scale_multiplies_grids() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[family]\nkind = szego\nlambda = 0.5\n\n[opuc]\nn = 4\ngrid = 64\n",
    );
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    let s = bin().args(["opuc", "--config"]).arg(&cfg).arg("--out").arg(&out1).status().unwrap();
    assert!(s.success());
    let s = bin()
        .args(["opuc", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out2)
        .args(["--grid-scale", "4"])
        .status()
        .unwrap();
    assert!(s.success());
    let count = |p: &Path| std::fs::read_to_string(p.join("density.csv")).unwrap().lines().count();
    assert_eq!(count(&out1) - 1, 64);
    assert_eq!(count(&out2) - 1, 256);
}

#[test]
fn truncation_cmv_reports_defect() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[family]\nkind = szego\nlambda = 0.4\n\n\
         [potential]\ncosine_amp = 0.1\n\n[truncation]\nn = 32\n",
    );
    let out = dir.path().join("out");
    let s = bin().args(["truncation", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert!(s.success());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary["unitarity_defect"].as_f64().unwrap() < 1e-10);
    let rows = std::fs::read_to_string(out.join("eigenvalues.csv")).unwrap().lines().count() - 1;
    assert_eq!(rows, 32);
}
