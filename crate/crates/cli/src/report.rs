//! Report emission: CSV tables with full-precision floats, a JSON summary
//! carrying the same numbers, and a manifest tying the run together.
//!
//! CSV is comma separated, UTF-8, LF, one header row. Floats are printed
//! with 17 significant digits so parsing them back is bit exact.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Reporter {
    out_dir: PathBuf,
    files: BTreeMap<String, String>,
    started: Instant,
}

#[derive(Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_hash: String,
    pub files: BTreeMap<String, String>,
    pub wall_clock_seconds: f64,
    /// Grid refinement deltas reported by scan-type subcommands.
    pub refinement_deltas: BTreeMap<String, f64>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    format!("{:x}", h.finalize())
}

impl Reporter {
    pub fn new(out_dir: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(out_dir)?;
        Ok(Reporter { out_dir: out_dir.to_path_buf(), files: BTreeMap::new(), started: Instant::now() })
    }

    fn record(&mut self, name: &str, bytes: &[u8]) -> std::io::Result<()> {
        std::fs::write(self.out_dir.join(name), bytes)?;
        self.files.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    /// Write a CSV table: fixed column order, one row per record.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
        let mut text = String::new();
        text.push_str(&header.join(","));
        text.push('\n');
        for row in rows {
            assert_eq!(row.len(), header.len(), "row width mismatch in {name}");
            text.push_str(&row.join(","));
            text.push('\n');
        }
        self.record(name, text.as_bytes())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable summary");
        text.push('\n');
        self.record(name, text.as_bytes())
    }

    pub fn finish(
        self,
        config_text: &str,
        refinement_deltas: BTreeMap<String, f64>,
    ) -> std::io::Result<RunManifest> {
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: sha256_hex(config_text.as_bytes()),
            files: self.files.clone(),
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            refinement_deltas,
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest");
        text.push('\n');
        std::fs::write(self.out_dir.join("manifest.json"), text)?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for &x in &[0.1, -3.0, 1.0 / 3.0, 2.0f64.powi(-40) * 0.7, 6.02e23] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn csv_shape() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = Reporter::new(dir.path()).unwrap();
        r.csv("t.csv", &["a", "b"], &[vec!["1".into(), "2".into()]]).unwrap();
        let text = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert_eq!(text, "a,b\n1,2\n");
        let m = r.finish("cfg", BTreeMap::new()).unwrap();
        assert!(m.files.contains_key("t.csv"));
        assert!(dir.path().join("manifest.json").exists());
    }
}
