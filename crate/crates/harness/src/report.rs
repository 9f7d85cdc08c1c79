//! Verification reports and their files.
//!
//! `summary.csv` has one row per check with the columns of
//! [`SUMMARY_COLUMNS`]. `checks/<name>.csv` holds the per-check detail
//! table. `meta.json` stores the config and the full report. Reals are
//! written with 17 significant digits; absent values are empty fields.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::ExperimentConfig;

pub const SCHEMA_VERSION: u32 = 1;

pub const SUMMARY_COLUMNS: [&str; 11] = [
    "experiment_id",
    "check",
    "tier",
    "status",
    "value",
    "fit_c",
    "fit_q",
    "k",
    "n",
    "family",
    "seed",
];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("check `{0}` reported twice")]
    DuplicateCheck(String),
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("reading {path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    /// Identities and inclusions; a failure sets the exit code.
    Exact,
    /// Measured constants; never gate.
    Tracked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Recorded,
}

impl Tier {
    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Exact => "exact",
            Tier::Tracked => "tracked",
        }
    }
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Recorded => "recorded",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub c: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    pub name: String,
    /// `None` when the quantity is undefined for this run.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Formats a real for reports; non-finite values become empty fields.
pub fn real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

pub fn opt_real(v: Option<f64>) -> String {
    v.map_or(String::new(), real)
}

/// `Some(v)` for finite `v`.
pub fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub tier: Tier,
    pub status: Status,
    /// Headline measured constant.
    pub value: Option<f64>,
    pub fit: Option<Fit>,
    pub measured: Vec<Measure>,
    pub detail: Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub k: usize,
    pub n: usize,
    pub family: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub experiment_id: String,
    pub environment: Environment,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        VerificationReport {
            schema_version: SCHEMA_VERSION,
            experiment_id: cfg.experiment_id(),
            environment: Environment {
                k: cfg.k,
                n: cfg.n,
                family: cfg.family.clone(),
                seed: cfg.seed,
            },
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, rec: CheckRecord) -> Result<(), ReportError> {
        if self.checks.iter().any(|c| c.name == rec.name) {
            return Err(ReportError::DuplicateCheck(rec.name));
        }
        self.checks.push(rec);
        Ok(())
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Names of the exact checks that failed.
    pub fn exact_failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| c.tier == Tier::Exact && c.status != Status::Pass)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn exact_passed(&self) -> bool {
        self.exact_failures().is_empty()
    }

    pub fn summary_csv(&self) -> Result<String, ReportError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(SUMMARY_COLUMNS)?;
        let env = &self.environment;
        for c in &self.checks {
            w.write_record([
                self.experiment_id.clone(),
                c.name.clone(),
                c.tier.as_str().into(),
                c.status.as_str().into(),
                opt_real(c.value),
                opt_real(c.fit.map(|f| f.c)),
                opt_real(c.fit.map(|f| f.q)),
                env.k.to_string(),
                env.n.to_string(),
                env.family.clone(),
                env.seed.to_string(),
            ])?;
        }
        into_string(w)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

pub fn detail_csv(t: &Table) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.columns)?;
    for r in &t.rows {
        w.write_record(r)?;
    }
    into_string(w)
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String, ReportError> {
    let bytes = w
        .into_inner()
        .map_err(|e| ReportError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Summary of a report in the requested format.
pub fn render(report: &VerificationReport, format: Format) -> Result<String, ReportError> {
    match format {
        Format::Csv => report.summary_csv(),
        Format::Json => Ok(report.to_json()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub report: VerificationReport,
}

fn write(path: &Path, body: &str) -> Result<(), ReportError> {
    fs::write(path, body).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `summary.csv`, `checks/<name>.csv` and `meta.json` under `dir`.
pub fn emit(
    report: &VerificationReport,
    cfg: &ExperimentConfig,
    dir: &Path,
) -> Result<(), ReportError> {
    let checks = dir.join("checks");
    fs::create_dir_all(&checks).map_err(|source| ReportError::Io {
        path: checks.clone(),
        source,
    })?;
    write(&dir.join("summary.csv"), &report.summary_csv()?)?;
    for c in &report.checks {
        write(
            &checks.join(format!("{}.csv", c.name)),
            &detail_csv(&c.detail)?,
        )?;
    }
    let meta = Meta {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        report: report.clone(),
    };
    let body = serde_json::to_string_pretty(&meta).expect("meta fields serialize");
    write(&dir.join("meta.json"), &body)
}

pub fn load_meta(dir: &Path) -> Result<Meta, ReportError> {
    let path = dir.join("meta.json");
    let text = fs::read_to_string(&path).map_err(|source| ReportError::Io {
        path: path.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| ReportError::Json { path, source })
}
