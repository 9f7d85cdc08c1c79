//! Knot sequence families, registered by name.
//!
//! A family produces a list of points in (0,1) with every value repeated at
//! most k times. The same points feed the interval and the torus systems.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use orthospline::{Domain, KnotSequence};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::ExperimentConfig;
use crate::streams;

pub const DYADIC: &str = "dyadic";
pub const UNIFORM_RANDOM: &str = "uniform-random";
pub const CLUSTERED: &str = "clustered";
pub const REPEATED_KNOT: &str = "repeated-knot";
pub const CUSTOM_FILE: &str = "custom-file";

/// Deepest level of the clustered family: offsets shrink down to `2^-20`.
pub const CLUSTER_LEVELS: i32 = 20;
/// Draws allowed per requested point before a random family gives up.
pub const MAX_DRAWS_PER_POINT: usize = 1000;

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("unknown family `{0}`")]
    Unknown(String),
    #[error("family {family}: gave up after {draws} draws")]
    Exhausted { family: String, draws: usize },
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
    #[error(transparent)]
    Sequence(#[from] orthospline::Error),
}

pub trait SequenceFamily: Send + Sync {
    fn name(&self) -> &str;
    /// The first `n` points for order `k`.
    fn points(&self, k: usize, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>, FamilyError>;
}

type Factory = fn(&ExperimentConfig) -> Result<Box<dyn SequenceFamily>, FamilyError>;

fn registry() -> &'static HashMap<&'static str, Factory> {
    static REG: std::sync::OnceLock<HashMap<&'static str, Factory>> = std::sync::OnceLock::new();
    REG.get_or_init(|| {
        let mut m: HashMap<&'static str, Factory> = HashMap::new();
        m.insert(DYADIC, |_| Ok(Box::new(Dyadic)));
        m.insert(UNIFORM_RANDOM, |_| Ok(Box::new(UniformRandom)));
        m.insert(CLUSTERED, |_| Ok(Box::new(Clustered)));
        m.insert(REPEATED_KNOT, |_| Ok(Box::new(RepeatedKnot)));
        m.insert(CUSTOM_FILE, |cfg| {
            let path = cfg.sequence_file.clone().ok_or_else(|| FamilyError::File {
                path: PathBuf::new(),
                message: "no sequence_file configured".into(),
            })?;
            Ok(Box::new(CustomFile::load(&path)?))
        });
        m
    })
}

pub fn is_registered(name: &str) -> bool {
    registry().contains_key(name)
}

/// Registered names in sorted order.
pub fn names() -> Vec<&'static str> {
    let mut v: Vec<_> = registry().keys().copied().collect();
    v.sort_unstable();
    v
}

pub fn family_for(cfg: &ExperimentConfig) -> Result<Box<dyn SequenceFamily>, FamilyError> {
    let f = registry()
        .get(cfg.family.as_str())
        .ok_or_else(|| FamilyError::Unknown(cfg.family.clone()))?;
    f(cfg)
}

/// Points of a family with the family stream of `seed`.
pub fn generate_points(
    family: &dyn SequenceFamily,
    k: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>, FamilyError> {
    let mut rng = streams::named(seed, family.name());
    family.points(k, n, &mut rng)
}

/// Named-family shortcut without a config file.
pub fn generate_sequence(
    family: &str,
    n: usize,
    seed: u64,
    k: usize,
    domain: Domain,
) -> Result<KnotSequence, FamilyError> {
    let cfg = ExperimentConfig {
        family: family.to_string(),
        ..ExperimentConfig::default()
    };
    let fam = family_for(&cfg)?;
    let pts = generate_points(fam.as_ref(), k, n, seed)?;
    Ok(KnotSequence::from_points(domain, k, &pts)?)
}

// Accepts points while tracking multiplicities.
struct Collector {
    k: usize,
    n: usize,
    points: Vec<f64>,
    counts: HashMap<u64, usize>,
}

impl Collector {
    fn new(k: usize, n: usize) -> Self {
        Collector {
            k,
            n,
            points: Vec::with_capacity(n),
            counts: HashMap::new(),
        }
    }

    fn done(&self) -> bool {
        self.points.len() >= self.n
    }

    /// Adds `x` unless it leaves (0,1) or would exceed multiplicity k.
    fn offer(&mut self, x: f64) -> bool {
        if self.done() || !(x > 0.0 && x < 1.0) {
            return false;
        }
        let c = self.counts.entry(x.to_bits()).or_insert(0);
        if *c >= self.k {
            return false;
        }
        *c += 1;
        self.points.push(x);
        true
    }
}

fn draw_loop<F: FnMut(&mut Collector)>(
    name: &str,
    k: usize,
    n: usize,
    mut step: F,
) -> Result<Vec<f64>, FamilyError> {
    let mut col = Collector::new(k, n);
    let budget = MAX_DRAWS_PER_POINT * n.max(1);
    let mut draws = 0;
    while !col.done() {
        if draws >= budget {
            return Err(FamilyError::Exhausted {
                family: name.into(),
                draws,
            });
        }
        step(&mut col);
        draws += 1;
    }
    Ok(col.points)
}

/// `1/2, 1/4, 3/4, 1/8, 3/8, ...`
pub struct Dyadic;

impl SequenceFamily for Dyadic {
    fn name(&self) -> &str {
        DYADIC
    }

    fn points(&self, _k: usize, n: usize, _rng: &mut ChaCha8Rng) -> Result<Vec<f64>, FamilyError> {
        let mut out = Vec::with_capacity(n);
        let mut level = 1u32;
        while out.len() < n {
            let den = (1u64 << level) as f64;
            let mut num = 1u64;
            while (num as f64) < den && out.len() < n {
                out.push(num as f64 / den);
                num += 2;
            }
            level += 1;
        }
        Ok(out)
    }
}

/// I.i.d. uniform points.
pub struct UniformRandom;

impl SequenceFamily for UniformRandom {
    fn name(&self) -> &str {
        UNIFORM_RANDOM
    }

    fn points(&self, k: usize, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>, FamilyError> {
        draw_loop(self.name(), k, n, |c| {
            c.offer(rng.gen::<f64>());
        })
    }
}

/// Points `c + 0.5 u 2^{-m}` around a random center `c`, with `u` uniform
/// in (-1,1) and `m` uniform in `0..=20`, so the sequence accumulates
/// geometrically at `c`.
pub struct Clustered;

impl SequenceFamily for Clustered {
    fn name(&self) -> &str {
        CLUSTERED
    }

    fn points(&self, k: usize, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>, FamilyError> {
        let center: f64 = rng.gen_range(0.0..1.0);
        draw_loop(self.name(), k, n, |c| {
            let m = rng.gen_range(0..=CLUSTER_LEVELS);
            let u: f64 = rng.gen_range(-1.0..1.0);
            c.offer(center + 0.5 * u * 2f64.powi(-m));
        })
    }
}

/// Uniform points, each inserted with a random multiplicity in `1..=k`.
pub struct RepeatedKnot;

impl SequenceFamily for RepeatedKnot {
    fn name(&self) -> &str {
        REPEATED_KNOT
    }

    fn points(&self, k: usize, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>, FamilyError> {
        draw_loop(self.name(), k, n, |c| {
            let x: f64 = rng.gen();
            let mult = rng.gen_range(1..=k);
            for _ in 0..mult {
                if !c.offer(x) {
                    break;
                }
            }
        })
    }
}

/// Points read from a text file: numbers separated by whitespace or
/// commas, `#` starts a comment. The first `n` are used.
pub struct CustomFile {
    path: PathBuf,
    values: Vec<f64>,
}

impl CustomFile {
    pub fn load(path: &Path) -> Result<Self, FamilyError> {
        let text = std::fs::read_to_string(path).map_err(|source| FamilyError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut values = Vec::new();
        for line in text.lines() {
            let body = line.split('#').next().unwrap_or("");
            for tok in body
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
            {
                values.push(tok.parse::<f64>().map_err(|_| FamilyError::File {
                    path: path.to_path_buf(),
                    message: format!("not a number: {tok}"),
                })?);
            }
        }
        Ok(CustomFile {
            path: path.to_path_buf(),
            values,
        })
    }
}

impl SequenceFamily for CustomFile {
    fn name(&self) -> &str {
        CUSTOM_FILE
    }

    fn points(&self, k: usize, n: usize, _rng: &mut ChaCha8Rng) -> Result<Vec<f64>, FamilyError> {
        let err = |message: String| FamilyError::File {
            path: self.path.clone(),
            message,
        };
        if self.values.len() < n {
            return Err(err(format!("{} points, {n} requested", self.values.len())));
        }
        let mut col = Collector::new(k, n);
        for &x in &self.values[..n] {
            if !col.offer(x) {
                return Err(err(format!(
                    "point {x} is outside (0,1) or repeats more than {k} times"
                )));
            }
        }
        Ok(col.points)
    }
}
