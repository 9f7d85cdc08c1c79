//! Experiment configuration and its flat `key = value` file format.
//!
//! ```text
//! # comments start with '#'
//! k = 3
//! family = clustered
//! n = 200
//! p_list = 1.25, 1.5, 3
//! seed = 7
//! trials = 200
//! m = 8
//! output_dir = out/k3
//! ```
//!
//! Optional keys: `N_k_override` (first point of the tail expansions) and
//! `sequence_file` (required by the `custom-file` family).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_K: usize = 6;
pub const MAX_N: usize = 2000;
pub const DEFAULT_M: usize = 8;
pub const MAX_M: usize = 64;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected key = value")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("bad value for `{key}`: {value}")]
    Value { key: String, value: String },
    #[error("{0}")]
    Invalid(String),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub k: usize,
    pub family: String,
    pub n: usize,
    pub p_list: Vec<f64>,
    pub seed: u64,
    pub trials: usize,
    pub m: usize,
    #[serde(rename = "N_k_override")]
    pub n_k_override: Option<usize>,
    pub output_dir: PathBuf,
    pub sequence_file: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            k: 2,
            family: "dyadic".into(),
            n: 64,
            p_list: vec![1.5],
            seed: 0,
            trials: 100,
            m: DEFAULT_M,
            n_k_override: None,
            output_dir: PathBuf::from("out"),
            sequence_file: None,
        }
    }
}

const KEYS: [&str; 10] = [
    "k",
    "family",
    "n",
    "p_list",
    "seed",
    "trials",
    "m",
    "N_k_override",
    "output_dir",
    "sequence_file",
];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Value {
        key: key.into(),
        value: value.into(),
    })
}

/// Comma or whitespace separated exponents; `inf` is rejected later by
/// validation.
pub fn parse_p_list(value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_num("p_list", s))
        .collect()
}

impl ExperimentConfig {
    /// Parses a config file body. Missing keys keep their defaults; the
    /// result is validated.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: line_no })?;
            let (key, value) = (key.trim(), value.trim());
            let Some(&known) = KEYS.iter().find(|&&k| k == key) else {
                return Err(ConfigError::UnknownKey {
                    line: line_no,
                    key: key.into(),
                });
            };
            if seen.contains(&known) {
                return Err(ConfigError::Duplicate {
                    line: line_no,
                    key: key.into(),
                });
            }
            seen.push(known);
            cfg.set(known, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "k" => self.k = parse_num(key, value)?,
            "family" => self.family = value.to_string(),
            "n" => self.n = parse_num(key, value)?,
            "p_list" => self.p_list = parse_p_list(value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "trials" => self.trials = parse_num(key, value)?,
            "m" => self.m = parse_num(key, value)?,
            "N_k_override" => self.n_k_override = Some(parse_num(key, value)?),
            "output_dir" => self.output_dir = PathBuf::from(value),
            "sequence_file" => self.sequence_file = Some(PathBuf::from(value)),
            _ => unreachable!("key list checked by the caller"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !(1..=MAX_K).contains(&self.k) {
            return bad(format!("k must lie in 1..={MAX_K}, got {}", self.k));
        }
        if self.n > MAX_N {
            return bad(format!("n must be at most {MAX_N}, got {}", self.n));
        }
        // the periodic half of every experiment needs room for the
        // periodic/non-periodic comparison
        if self.n < 2 * self.k + 2 {
            return bad(format!(
                "n must be at least 2k+2 = {}, got {}",
                2 * self.k + 2,
                self.n
            ));
        }
        if self.p_list.is_empty() {
            return bad("p_list is empty".into());
        }
        if let Some(p) = self.p_list.iter().find(|p| !(p.is_finite() && **p > 1.0)) {
            return bad(format!("every p must lie in (1, inf), got {p}"));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(1..=MAX_M).contains(&self.m) {
            return bad(format!("m must lie in 1..={MAX_M}, got {}", self.m));
        }
        if self.n_k_override == Some(0) {
            return bad("N_k_override must be positive".into());
        }
        if !crate::families::is_registered(&self.family) {
            return bad(format!(
                "unknown family `{}`; known: {}",
                self.family,
                crate::families::names().join(", ")
            ));
        }
        if self.family == crate::families::CUSTOM_FILE && self.sequence_file.is_none() {
            return bad("family custom-file needs sequence_file".into());
        }
        Ok(())
    }

    /// First point index of the tail expansions.
    pub fn n_k(&self) -> usize {
        self.n_k_override
            .unwrap_or_else(|| orthospline::analysis::default_start(self.k))
    }

    /// Stable identifier built from the fields that determine the results.
    pub fn experiment_id(&self) -> String {
        let ps: Vec<String> = self.p_list.iter().map(|p| format!("{p}")).collect();
        let mut id = format!(
            "k{}-{}-n{}-p{}-t{}-m{}-s{}",
            self.k,
            self.family,
            self.n,
            ps.join("_"),
            self.trials,
            self.m,
            self.seed
        );
        if let Some(v) = self.n_k_override {
            let _ = write!(id, "-N{v}");
        }
        id
    }

    /// Config file body that parses back to `self`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let ps: Vec<String> = self.p_list.iter().map(|p| format!("{p}")).collect();
        let _ = writeln!(out, "k = {}", self.k);
        let _ = writeln!(out, "family = {}", self.family);
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "p_list = {}", ps.join(", "));
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "trials = {}", self.trials);
        let _ = writeln!(out, "m = {}", self.m);
        if let Some(v) = self.n_k_override {
            let _ = writeln!(out, "N_k_override = {v}");
        }
        let _ = writeln!(out, "output_dir = {}", self.output_dir.display());
        if let Some(f) = &self.sequence_file {
            let _ = writeln!(out, "sequence_file = {}", f.display());
        }
        out
    }
}
