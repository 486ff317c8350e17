//! Flat, sectioned `key = value` experiment configs. The format is
//! deliberately dumb: `[section]` headers, one assignment per line, `#`
//! comments, values kept verbatim as trimmed strings. Typed access and
//! validation happen on top so that error messages can name the field.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use qpcocycle::families::{AnalyticCircleFunction, CocycleFamily, SzegoPotential};
use qpcocycle::mat2::c64;

#[derive(Debug)]
pub struct ConfigError {
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { message: message.into() })
}

/// Parsed config: sections in file order, keys in file order within each
/// section. Values are stored as written (trimmed), so serialize/parse is
/// an exact round trip modulo whitespace and comments.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub sections: Vec<(String, Vec<(String, String)>)>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut sections: Vec<(String, Vec<(String, String)>)> = Vec::new();
        let mut seen = BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let Some(name) = name.strip_suffix(']') else {
                    return err(format!("line {}: unterminated section header", lineno + 1));
                };
                let name = name.trim().to_string();
                if !seen.insert(name.clone()) {
                    return err(format!("line {}: duplicate section [{}]", lineno + 1, name));
                }
                sections.push((name, Vec::new()));
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(format!("line {}: expected `key = value`", lineno + 1));
            };
            let Some((_, body)) = sections.last_mut() else {
                return err(format!("line {}: assignment before any [section]", lineno + 1));
            };
            let key = key.trim().to_string();
            if body.iter().any(|(k, _)| *k == key) {
                return err(format!("line {}: duplicate key `{}`", lineno + 1, key));
            }
            body.push((key, value.trim().to_string()));
        }
        Ok(ExperimentConfig { sections })
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (name, body) in &self.sections {
            let _ = writeln!(out, "[{name}]");
            for (k, v) in body {
                let _ = writeln!(out, "{k} = {v}");
            }
            let _ = writeln!(out);
        }
        out
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .iter()
            .find(|(n, _)| n == section)
            .and_then(|(_, body)| body.iter().find(|(k, _)| k == key))
            .map(|(_, v)| v.as_str())
    }

    pub fn require(&self, section: &str, key: &str) -> Result<&str, ConfigError> {
        self.get(section, key)
            .ok_or_else(|| ConfigError { message: format!("missing field {section}.{key}") })
    }

    pub fn f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| ConfigError { message: format!("{section}.{key}: bad float `{v}`") }),
        }
    }

    pub fn usize_or(&self, section: &str, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError {
                message: format!("{section}.{key}: bad integer `{v}`"),
            }),
        }
    }

    pub fn f64_list(&self, section: &str, key: &str) -> Result<Vec<f64>, ConfigError> {
        let Some(v) = self.get(section, key) else { return Ok(Vec::new()) };
        v.split_whitespace()
            .map(|s| {
                s.parse().map_err(|_| ConfigError {
                    message: format!("{section}.{key}: bad float `{s}` in list"),
                })
            })
            .collect()
    }

    /// Build the circle function described by the [potential] section:
    /// constant_re/constant_im + cosine_amp at cosine_mode, with an
    /// analyticity width delta.
    pub fn potential_fn(&self) -> Result<AnalyticCircleFunction, ConfigError> {
        let delta = self.f64_or("potential", "delta", 0.4)?;
        if delta <= 0.0 {
            return err("potential.delta: must be positive");
        }
        let amp = self.f64_or("potential", "cosine_amp", 0.0)?;
        let mode = self.usize_or("potential", "cosine_mode", 1)? as i64;
        let cre = self.f64_or("potential", "constant_re", 0.0)?;
        let cim = self.f64_or("potential", "constant_im", 0.0)?;
        let mut f = if amp != 0.0 {
            AnalyticCircleFunction::cosine(amp, mode, delta)
        } else {
            AnalyticCircleFunction::constant(c64(0.0, 0.0))
        };
        if cre != 0.0 || cim != 0.0 {
            f = f.plus_constant(c64(cre, cim));
        }
        Ok(f)
    }

    pub fn szego_potential(&self) -> Result<SzegoPotential, ConfigError> {
        let lambda = self.f64_or("family", "lambda", 0.5)?;
        if !(0.0..1.0).contains(&lambda) {
            return err(format!("family.lambda: Szegő coupling must lie in [0, 1), got {lambda}"));
        }
        let k = self.f64_or("family", "k", 0.0)? as i64;
        SzegoPotential::new(k, self.potential_fn()?, lambda)
            .map_err(|e| ConfigError { message: format!("family: {e}") })
    }

    /// Build the cocycle family from the [family] section.
    pub fn family(&self) -> Result<CocycleFamily, ConfigError> {
        let kind = self.require("family", "kind")?;
        let alpha = self.f64_or("family", "alpha", qpcocycle::GOLDEN_MEAN)?;
        let y = self.f64_or("family", "y", 0.0)?;
        let lambda = self.f64_or("family", "lambda", 0.5)?;
        let build = match kind {
            "szego" => {
                let t = self.f64_or("family", "t", 0.0)?;
                CocycleFamily::szego(self.szego_potential()?, t, alpha, y)
            }
            "schrodinger" => {
                let e = self.f64_or("family", "e", 0.0)?;
                CocycleFamily::schrodinger(self.potential_fn()?, lambda, e, alpha, y)
            }
            "schrodinger_shifted" => {
                let t = self.f64_or("family", "t", 0.0)?;
                CocycleFamily::schrodinger_shifted(self.potential_fn()?, lambda, t, alpha, y)
            }
            "diagonal_exp" => return Ok(CocycleFamily::diagonal_exp(alpha, y)),
            other => return err(format!("family.kind: unknown kind `{other}`")),
        };
        build.map_err(|e| ConfigError { message: format!("family: {e}") })
    }
}
