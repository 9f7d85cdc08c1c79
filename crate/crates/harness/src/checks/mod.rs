//! The check battery.
//!
//! Every check implements [`Check`] and is registered by name in
//! [`registry`]. Exact checks verify identities and inclusions and decide
//! the exit status; tracked checks record measured constants and fitted
//! `(C, q)` pairs and never fail a run.

use std::sync::OnceLock;

use anyhow::Result;
use orthospline::fit::{envelope_fit, DecayFit};
use orthospline::{build_system, Domain, KnotSequence, OrthoSystem};
use rand::Rng;

use crate::config::ExperimentConfig;
use crate::families;
use crate::report::{real, CheckRecord, Fit, Measure, Status, Table, Tier};
use crate::streams;

mod analysis;
mod exact;
mod ortho;
mod spline;

pub use exact::boehm_error;
pub use ortho::{norm_samples, NormSample};

/// Measured output of a check before it becomes a [`CheckRecord`].
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    /// Verdict of an exact check; ignored for tracked checks.
    pub pass: Option<bool>,
    pub value: Option<f64>,
    pub fit: Option<Fit>,
    pub measured: Vec<Measure>,
    pub detail: Table,
}

impl Outcome {
    pub fn measure(&mut self, name: impl Into<String>, value: f64) {
        self.measured.push(Measure {
            name: name.into(),
            value: crate::report::finite(value),
        });
    }

    pub fn measure_opt(&mut self, name: impl Into<String>, value: Option<f64>) {
        self.measured.push(Measure {
            name: name.into(),
            value: value.and_then(crate::report::finite),
        });
    }
}

pub trait Check: Send + Sync {
    fn name(&self) -> &'static str;
    fn tier(&self) -> Tier;
    fn run(&self, ctx: &Context) -> Result<Outcome>;
}

/// All checks in report order.
pub fn registry() -> Vec<Box<dyn Check>> {
    let mut v: Vec<Box<dyn Check>> = Vec::new();
    v.extend(exact::checks());
    v.extend(spline::checks());
    v.extend(ortho::checks());
    v.extend(analysis::checks());
    v
}

pub fn names() -> Vec<&'static str> {
    registry().iter().map(|c| c.name()).collect()
}

/// Checks to run: the named ones (all when `names` is empty), exact
/// checks only when `exact_only`.
pub fn select(names: &[String], exact_only: bool) -> Result<Vec<Box<dyn Check>>> {
    let all = registry();
    for n in names {
        if !all.iter().any(|c| c.name() == n) {
            anyhow::bail!("unknown check `{n}`");
        }
    }
    Ok(all
        .into_iter()
        .filter(|c| names.is_empty() || names.iter().any(|n| n == c.name()))
        .filter(|c| !exact_only || c.tier() == Tier::Exact)
        .collect())
}

/// Runs one check. Errors become a failed (exact) or empty (tracked)
/// record carrying the message.
pub fn run_check(check: &dyn Check, ctx: &Context) -> CheckRecord {
    let tier = check.tier();
    match check.run(ctx) {
        Ok(o) => CheckRecord {
            name: check.name().into(),
            tier,
            status: match tier {
                Tier::Exact if o.pass == Some(true) => Status::Pass,
                Tier::Exact => Status::Fail,
                Tier::Tracked => Status::Recorded,
            },
            value: o.value.and_then(crate::report::finite),
            fit: o.fit.filter(|f| f.c.is_finite() && f.q.is_finite()),
            measured: o.measured,
            detail: o.detail,
        },
        Err(e) => {
            let mut detail = Table::new(&["error"]);
            detail.push(vec![format!("{e:#}")]);
            CheckRecord {
                name: check.name().into(),
                tier,
                status: match tier {
                    Tier::Exact => Status::Fail,
                    Tier::Tracked => Status::Recorded,
                },
                value: None,
                fit: None,
                measured: Vec::new(),
                detail,
            }
        }
    }
}

/// Systems and shared intermediate results of one experiment.
pub struct Context {
    pub config: ExperimentConfig,
    pub points: Vec<f64>,
    pub interval: OrthoSystem,
    pub torus: OrthoSystem,
    coefficients: Vec<f64>,
    comparisons: OnceLock<Result<Vec<ortho::Comparison>, String>>,
    w_fit: OnceLock<Result<Option<DecayFit>, String>>,
    enclosure_fit: OnceLock<Result<Option<DecayFit>, String>>,
}

impl Context {
    pub fn build(config: &ExperimentConfig) -> Result<Self> {
        let family = families::family_for(config)?;
        let points = families::generate_points(family.as_ref(), config.k, config.n, config.seed)?;
        Self::from_points(config, points)
    }

    pub fn from_points(config: &ExperimentConfig, points: Vec<f64>) -> Result<Self> {
        let k = config.k;
        let iseq = KnotSequence::from_points(Domain::Interval, k, &points)?;
        let tseq = KnotSequence::from_points(Domain::Torus, k, &points)?;
        let (interval, torus) = rayon::join(|| build_system(&iseq), || build_system(&tseq));
        let (interval, torus) = (interval?, torus?);
        let len = interval.len().max(torus.len());
        let mut rng = streams::named(config.seed, "coefficients");
        let coefficients = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Ok(Context {
            config: config.clone(),
            points,
            interval,
            torus,
            coefficients,
            comparisons: OnceLock::new(),
            w_fit: OnceLock::new(),
            enclosure_fit: OnceLock::new(),
        })
    }

    pub fn systems(&self) -> [(&'static str, &OrthoSystem); 2] {
        [("interval", &self.interval), ("torus", &self.torus)]
    }

    /// Suite expansion coefficients for `system`: i.i.d. uniform on
    /// (-1,1), shared prefix across the two domains.
    pub fn coefficients(&self, system: &OrthoSystem) -> Vec<f64> {
        self.coefficients[..system.len()].to_vec()
    }

    /// Per-check generator.
    pub fn rng(&self, label: &str) -> rand_chacha::ChaCha8Rng {
        streams::named(self.config.seed, label)
    }
}

fn cached<T: Clone>(
    cell: &OnceLock<Result<T, String>>,
    f: impl FnOnce() -> Result<T>,
) -> Result<T> {
    cell.get_or_init(|| f().map_err(|e| format!("{e:#}")))
        .clone()
        .map_err(anyhow::Error::msg)
}

/// Up to `max` system positions past the initial block whose prefix has at
/// least `min_points` points, evenly spaced and always including the last.
pub fn sample_positions(system: &OrthoSystem, min_points: usize, max: usize) -> Vec<usize> {
    let eligible: Vec<usize> = (system.initial_len..system.len())
        .filter(|&pos| system.prefix_len(pos) >= min_points)
        .collect();
    if eligible.len() <= max {
        return eligible;
    }
    if max <= 1 {
        return eligible.last().copied().into_iter().take(max).collect();
    }
    let last = eligible.len() - 1;
    let mut out: Vec<usize> = (0..max)
        .map(|i| eligible[(i * last).div_ceil(max - 1)])
        .collect();
    out.dedup();
    out
}

pub(crate) fn fit_of(f: &DecayFit) -> Fit {
    Fit { c: f.c, q: f.q }
}

pub(crate) fn fit_table(rows: &[(&str, Option<DecayFit>)]) -> Table {
    let mut t = Table::new(&["domain", "c", "q", "residual", "distances"]);
    for (name, f) in rows {
        match f {
            Some(f) => t.push(vec![
                name.to_string(),
                real(f.c),
                real(f.q),
                real(f.residual),
                f.distances.to_string(),
            ]),
            None => t.push(vec![
                name.to_string(),
                String::new(),
                String::new(),
                String::new(),
                "0".into(),
            ]),
        }
    }
    t
}

/// Relative level below which decay samples are treated as roundoff.
pub const NOISE_FLOOR: f64 = 1e-14;

// q within this of 1 counts as no decay
const FLAT_TOL: f64 = 1e-9;

/// Decay fit on the samples above the noise floor. When those show no
/// decay (`q ≈ 1`) but every sample at some larger distance sits below the
/// floor, the first such distance enters once at floor level so finitely
/// supported data still register their drop.
pub(crate) fn envelope(samples: &[(usize, f64)]) -> Option<DecayFit> {
    let top = samples
        .iter()
        .filter(|s| s.1.is_finite())
        .map(|s| s.1.abs())
        .fold(0.0, f64::max);
    let floor = NOISE_FLOOR * top;
    let mut kept: Vec<(usize, f64)> = samples
        .iter()
        .copied()
        .filter(|s| s.1.is_finite() && s.1.abs() > floor)
        .collect();
    let fit = envelope_fit(&kept)?;
    if fit.q < 1.0 - FLAT_TOL {
        return Some(fit);
    }
    let last = kept.iter().map(|s| s.0).max()?;
    match samples.iter().map(|s| s.0).filter(|&d| d > last).min() {
        Some(d) => {
            kept.push((d, floor));
            envelope_fit(&kept)
        }
        None => Some(fit),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names_are_unique() {
        let mut n = names();
        let len = n.len();
        n.sort_unstable();
        n.dedup();
        assert_eq!(n.len(), len);
    }

    #[test]
    fn sampling_is_even_and_bounded() {
        let cfg = ExperimentConfig {
            n: 40,
            ..ExperimentConfig::default()
        };
        let ctx = Context::build(&cfg).unwrap();
        let s = sample_positions(&ctx.interval, 10, 8);
        assert_eq!(s.len(), 8);
        assert_eq!(*s.last().unwrap(), ctx.interval.len() - 1);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert!(s.iter().all(|&p| ctx.interval.prefix_len(p) >= 10));
        assert_eq!(sample_positions(&ctx.interval, 1, 1000).len(), 40);
    }

    #[test]
    fn envelope_drops_roundoff() {
        let mut s: Vec<(usize, f64)> = (0..10).map(|d| (d, 0.5f64.powi(d as i32))).collect();
        s.push((30, 1e-17));
        let f = envelope(&s).unwrap();
        assert!((f.q - 0.5).abs() < 1e-12);
        assert_eq!(f.distances, 10);
    }

    #[test]
    fn envelope_sees_finite_support() {
        let s = vec![(0, 1.0), (1, 1.0), (2, 0.0), (3, 0.0)];
        let f = envelope(&s).unwrap();
        assert!(f.q < 1.0);
        for (d, v) in s {
            assert!(v <= f.c * f.q.powi(d as i32) * (1.0 + 1e-12));
        }
        let flat = envelope(&[(0, 1.0), (1, 1.0)]).unwrap();
        assert!(flat.q >= 1.0);
    }
}
