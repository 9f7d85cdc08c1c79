//! Checks on the orthonormal functions: coefficient decay, tail and norm
//! estimates, the periodic/non-periodic comparison and the pointwise
//! bound through minimal enclosing arcs.

use anyhow::{anyhow, Result};
use orthospline::bspline::lp_norm_coeffs;
use orthospline::charint::{
    count_large_nested, minimal_enclosure, nested_decay_ratio, CharInterval, Seg,
};
use orthospline::fit::DecayFit;
use orthospline::knots::cyclic_distance;
use orthospline::ortho::{
    alpha_closed_form, alpha_recursion, compare_periodic_nonperiodic, ComparisonReport,
};
use orthospline::{OrthoSystem, Partition, SplineBasis};
use rand::Rng;
use rayon::prelude::*;

use super::{cached, envelope, fit_of, fit_table, sample_positions, Check, Context, Outcome};
use crate::report::{real, Table, Tier};

pub const ALPHA_STEPS: usize = 256;
pub const DECAY_STEPS: usize = 128;
pub const TAIL_STEPS: usize = 32;
pub const NORM_STEPS: usize = 256;
pub const COMPARE_STEPS: usize = 64;
pub const ENCLOSURE_STEPS: usize = 32;
pub const UNION_STEPS: usize = 16;
pub const UNIONS_PER_STEP: usize = 8;
pub const NESTED_BETA: f64 = 0.25;
pub const NESTED_SETS: usize = 64;
/// Tail norms below this are roundoff and are not compared.
pub const DECAY_FLOOR: f64 = 1e-12;
pub const CHAIN_POINTS: usize = 8;

pub(super) fn checks() -> Vec<Box<dyn Check>> {
    vec![
        Box::new(AlphaAgreement),
        Box::new(WDecay),
        Box::new(WHatDecay),
        Box::new(TailEstimates),
        Box::new(NormEquivalence),
        Box::new(JRatio),
        Box::new(PointwiseEnclosure),
        Box::new(TailUnions),
        Box::new(NestedIntervals),
    ]
}

fn step(sys: &OrthoSystem, pos: usize) -> Result<(Partition, &orthospline::OrthoFunction)> {
    let f = sys
        .functions
        .get(pos.wrapping_sub(sys.initial_len))
        .ok_or_else(|| anyhow!("position {pos} has no insertion step"))?;
    Ok((sys.step_partition(sys.prefix_len(pos))?, f))
}

fn char_interval(f: &orthospline::OrthoFunction) -> Result<&CharInterval> {
    f.j.as_ref()
        .ok_or_else(|| anyhow!("step n={} has no characteristic interval", f.index_n))
}

/// Relative gap between the closed form and the recursion of `α`.
struct AlphaAgreement;

impl Check for AlphaAgreement {
    fn name(&self) -> &'static str {
        "alpha_agreement"
    }

    fn tier(&self) -> Tier {
        Tier::Tracked
    }

    fn run(&self, ctx: &Context) -> Result<Outcome> {
        let mut o = Outcome {
            detail: Table::new(&["domain", "cases", "max_relative_gap"]),
            ..Outcome::default()
        };
        let mut worst: f64 = 0.0;
        for (name, sys) in ctx.systems() {
            let min = if sys.basis.partition().is_periodic() {
                2 * sys.k()
            } else {
                1
            };
            let gaps = sample_positions(sys, min, ALPHA_STEPS)
                .into_par_iter()
                .map(|pos| -> Result<f64> {
                    let (p, f) = step(sys, pos)?;
                    let a = alpha_closed_form(&p, f.i0)?;
                    let b = alpha_recursion(&p, f.i0)?;
                    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    Ok(a.iter()
                        .zip(&b)
                        .map(|(x, y)| (x - y).abs())
                        .fold(0.0, f64::max)
                        / scale)
                })
                .collect::<Result<Vec<_>>>()?;
            let g = gaps.iter().copied().fold(0.0, f64::max);
            worst = worst.max(g);
            o.detail
                .push(vec![name.into(), gaps.len().to_string(), real(g)]);
        }
        o.value = Some(worst);
        Ok(o)
    }
}

/// `d_𝒯(z)`: entries of the clamped partition between `z` and `J`, with
/// multiplicity, endpoints included.
pub fn clamped_distance(p: &Partition, j: &Seg, z: f64) -> usize {
    let t = p.knots();
    let le = |x: f64| t.partition_point(|&v| v <= x);
    let lt = |x: f64| t.partition_point(|&v| v < x);
    if z >= j.a && z <= j.e {
        0
    } else if z > j.e {
        le(z) - lt(j.e)
    } else {
        le(j.a) - lt(z)
    }
}

/// `(d_𝒯(τ_j), |w_j| (|J| + dist(supp N_j, J) + ν_j))` for one step.
pub fn w_samples(p: &Partition, f: &orthospline::OrthoFunction) -> Result<Vec<(usize, f64)>> {
    let j = char_interval(f)?.j;
    let len = j.len();
    Ok(p.indices()
        .map(|i| {
            let (sa, sb) = p.support(i);
            let dist = (j.a - sb).max(sa - j.e).max(0.0);
            let d = clamped_distance(p, &j, p.tau(i));
            (d, f.w[p.storage(i)].abs() * (len + dist + p.nu(i)))
        })
        .collect())
}

pub(super) fn w_fit(ctx: &Context) -> Result<Option<DecayFit>> {
    cached(&ctx.w_fit, || {
        let sys = &ctx.interval;
        let samples: Vec<(usize, f64)> = sample_positions(sys, 1, DECAY_STEPS)
            .into_par_iter()
            .map(|pos| {
                let (p, f) = step(sys, pos)?;
                w_samples(&p, f)
            })
            .collect::<Result<Vec<_>>>()?
            .concat();
        Ok(envelope(&samples))
    })
}

struct WDecay;

impl Check for WDecay {
    fn name(&self) -> &'static str {
        "w_decay"
    }

    fn tier(&self) -> Tier {
        Tier::Tracked
    }

    fn run(&self, ctx: &Context) -> Result<Outcome> {
        let fit = w_fit(ctx)?;
        let mut o = Outcome {
            detail: fit_table(&[("interval", fit)]),
            ..Outcome::default()
        };
        if let Some(f) = fit {
            o.fit = Some(fit_of(&f));
            o.value = Some(f.q);
        }
        Ok(o)
    }
}

/// `(d̂(i,i0), |ŵ_i| min_j max(ν_i, ν_j))` over `j = i0-k..=i0`.
pub fn w_hat_samples(p: &Partition, f: &orthospline::OrthoFunction) -> Vec<(usize, f64)> {
    let k = p.k() as isize;
    let n = p.n();
    p.indices()
        .map(|i| {
            let den = (f.i0 - k..=f.i0)
                .map(|j| p.nu(i).max(p.nu(j)))
                .fold(f64::INFINITY, f64::min);
            (cyclic_distance(n, i, f.i0), f.w[p.storage(i)].abs() * den)
        })
        .collect()
}

struct WHatDecay;

impl Check for WHatDecay {
    fn name(&self) -> &'static str {
        "w_hat_decay"
    }

    fn tier(&self) -> Tier {
        Tier::Tracked
    }

    fn run(&self, ctx: &Context) -> Result<Outcome> {
        let sys = &ctx.torus;
        let samples: Vec<(usize, f64)> = sample_positions(sys, 2 * sys.k() + 2, DECAY_STEPS)
            .into_par_iter()
            .map(|pos| {
                let (p, f) = step(sys, pos)?;
                Ok(w_hat_samples(&p, f))
            })
            .collect::<Result<Vec<_>>>()?
            .concat();
        let fit = envelope(&samples);
        let mut o = Outcome {
            detail: fit_table(&[("torus", fit)]),
            ..Outcome::default()
        };
        if let Some(f) = fit {
            o.fit = Some(fit_of(&f));
            o.value = Some(f.q);
        }
        Ok(o)
    }
}

/// `∫_c |f|^p` for every cell of the basis.
fn cell_powers(basis: &SplineBasis, f: &[f64], p: f64) -> Result<Vec<f64>> {
    basis
        .cells()
        .iter()
        .map(|c| Ok(lp_norm_coeffs(basis, f, p, Some((c.a, c.b)))?.powf(p)))
        .collect()
}

/// Largest `‖f‖_{L^p(0,x)} (|J| + dist(x,J))^{1-1/p} / (q^{d(x)} |J|^{1/2})`
/// over grid points left of J, and the mirrored quantity on the right.
pub fn tail_ratio(p: &Partition, f: &orthospline::OrthoFunction, q: f64, exp: f64) -> Result<f64> {
    let j = char_interval(f)?.j;
    let len = j.len();
    let basis = SplineBasis::new(p.clone());
    let fnorm = f.normalized();
    let cells = basis.cells();
    let pw = cell_powers(&basis, &fnorm, exp)?;
    let total: f64 = pw.iter().sum();
    let mut best: f64 = 0.0;
    let mut left = 0.0;
    let bound = |x: f64, dist: f64| {
        q.powi(clamped_distance(p, &j, x) as i32) * len.sqrt() / (len + dist).powf(1.0 - 1.0 / exp)
    };
    for (c, v) in cells.iter().zip(&pw) {
        left += v;
        let x = c.b;
        let (lt, rt) = (
            left.powf(1.0 / exp),
            (total - left).max(0.0).powf(1.0 / exp),
        );
        if x < j.a && lt > DECAY_FLOOR {
            best = best.max(lt / bound(x, j.a - x));
        }
        if x > j.e && x < 1.0 && rt > DECAY_FLOOR {
            best = best.max(rt / bound(x, x - j.e));
        }
    }
    Ok(best)
}

struct TailEstimates;

impl Check for TailEstimates {
    fn name(&self) -> &'static str {
        "tail_estimates"
    }

    fn tier(&self) -> Tier {
        Tier::Tracked
    }

    fn run(&self, ctx: &Context) -> Result<Outcome> {
        let q = w_fit(ctx)?
            .filter(|f| f.q > 0.0 && f.q < 1.0)
            .ok_or_else(|| anyhow!("no usable coefficient decay fit"))?
            .q;
        let sys = &ctx.interval;
        let mut o = Outcome {
            detail: Table::new(&["p", "q", "steps", "max_ratio"]),
            ..Outcome::default()
        };
        let mut worst: f64 = 0.0;
        let positions = sample_positions(sys, 1, TAIL_STEPS);
        for &exp in &ctx.config.p_list {
            let r = positions
                .par_iter()
                .map(|&pos| {
                    let (p, f) = step(sys, pos)?;
                    tail_ratio(&p, f, q, exp)
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            worst = worst.max(r);
            o.measure(format!("p{exp}"), r);
            o.detail.push(vec![
                real(exp),
                real(q),
                positions.len().to_string(),
                real(r),
            ]);
        }
        o.value = Some(worst);
        Ok(o)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSample {
    pub pos: usize,
    /// Points in the step partition.
    pub n: usize,
    pub j_len: f64,
    /// `‖g‖_p |J|^{1-1/p}`.
    pub full: f64,
    /// `‖g‖_{L^p(J)} |J|^{1-1/p}`.
    pub on_j: f64,
}

/// Norm-equivalence samples at the given positions. `p` may be infinite.
pub fn norm_samples(sys: &OrthoSystem, positions: &[usize], p: f64) -> Result<Vec<NormSample>> {
    positions
        .par_iter()
        .map(|&pos| {
            let (part, f) = step(sys, pos)?;
            let j = char_interval(f)?.j;
            let basis = SplineBasis::new(part.clone());
            let scale = if p.is_infinite() {
                j.len()
            } else {
                j.len().powf(1.0 - 1.0 / p)
            };
            let full = lp_norm_coeffs(&basis, &f.w, p, None)?;
            let on_j = lp_norm_coeffs(&basis, &f.w, p, Some((j.a, j.a + j.len())))?;
            Ok(NormSample {
                pos,
                n: part.n(),
                j_len: j.len(),
                full: full * scale,
                on_j: on_j * scale,
            })
        })
        .collect()
}

/// `max / min` of a positive sample.
pub fn width(values: impl IntoIterator<Item = f64>) -> (f64, f64, f64) {
    let (lo, hi) = values
        .into_iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), v| (l.min(v), h.max(v)));
    (lo, hi, hi / lo)
}

struct NormEquivalence;

impl Check for NormEquivalence {
    fn name(&self) -> &'static str {
        "norm_equivalence"
    }

    fn tier(&self) -> Tier {
        Tier::Tracked
    }

    fn run(&self, ctx: &Context) -> Result<Outcome> {
        let mut ps = vec![1.0];
        ps.extend(ctx.config.p_list.iter().copied());
        ps.push(f64::INFINITY);
        ps.sort_by(f64::total_cmp);
        ps.dedup();
        let k = ctx.config.k;
        let mut o = Outcome {
            detail: Table::new(&["domain", "p", "quantity", "steps", "min", "max", "width"]),
            ..Outcome::default()
        };
        let mut worst: f64 = 0.0;
        for (name, sys) in ctx.systems() {
            let min = ctx.config.n_k().max(2 * k + 2);
            let positions = sample_positions(sys, min, NORM_STEPS);
            if positions.is_empty() {
                continue;
            }
            for &p in &ps {
                let s = norm_samples(sys, &positions, p)?;
                for (q, vals) in [
                    ("full", s.iter().map(|x| x.full).collect::<Vec<_>>()),
                    ("on_j", s.iter().map(|x| x.on_j).collect()),
                ] {
                    let (lo, hi, w) = width(vals);
                    worst = worst.max(w);
                    o.detail.push(vec![
                        name.into(),
                        real(p),
                        q.into(),
                        s.len().to_string(),
                        real(lo),
                        real(hi),
                        real(w),
                    ]);
                }
            }
        }
        o.value = Some(worst);
        Ok(o)
    }
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub n: usize,
    pub report: ComparisonReport,
}

pub(super) fn comparisons(ctx: &Context) -> Result<Vec<Comparison>> {
    cached(&ctx.comparisons, || {
        let sys = &ctx.torus;
        sample_positions(sys, 2 * sys.k() + 2, COMPARE_STEPS)
            .into_par_iter()
            .map(|pos| {
                let (p, f) = step(sys, pos)?;
                Ok(Comparison {
                    n: p.n(),
                    report: compare_periodic_nonperiodic(&p, f.i0)?,
                })
            })
            .collect()
    })
}

/// `|J| / |Ĵ|` under the maximal splitting.
struct JRatio;

impl Check for JRatio {
    fn name(&self) -> &'static str {
        "j_ratio"
    }

    fn tier(&self) -> Tier {
        Tier::Tracked
    }

    fn run(&self, ctx: &Context) -> Result<Outcome> {
        let comps = comparisons(ctx)?;
        let mut o = Outcome {
            detail: Table::new(&["n", "i0", "ratio", "c"]),
            ..Outcome::default()
        };
        for c in &comps {
            o.detail.push(vec![
                c.n.to_string(),
                c.report.i0.to_string(),
                real(c.report.ratio_j),
                real(c.report.c),
            ]);
        }
        let (lo, hi, w) = width(comps.iter().map(|c| c.report.ratio_j));
        o.measure("min", lo);
        o.measure("max", hi);
        o.value = Some(w);
        Ok(o)
    }
}

// Cell l of a periodic partition as `[a, b]` with `b` possibly past 1.
fn periodic_cell(p: &Partition, l: usize) -> (f64, f64) {
    let t = p.knots();
    let b = if l + 1 < t.len() {
        t[l + 1]
    } else {
        t[0] + 1.0
    };
    (t[l], b)
}

/// `(K(C(x)), |ĝ(x)| |C(x)|)` at `m` points per cell.
pub fn enclosure_samples(
    p: &Partition,
    f: &orthospline::OrthoFunction,
    m: usize,
) -> Result<Vec<(usize, f64)>> {
    let j = char_interval(f)?;
    let basis = SplineBasis::new(p.clone());
    let mut out = Vec::new();
    for l in 0..p.n() {
        let (a, b) = periodic_cell(p, l);
        if b <= a {
            continue;
        }
        let enc = minimal_enclosure(p, j, l as isize)?;
        for s in 0..m {
            let x = (a + (b - a) * (s as f64 + 0.5) / m as f64).rem_euclid(1.0);
            out.push((enc.k_count, basis.eval_coeffs(&f.w, x).abs() * enc.c.len()));
        }
    }
    Ok(out)
}

pub(super) fn enclosure_fit(ctx: &Context) -> Result<Option<DecayFit>> {
    cached(&ctx.enclosure_fit, || {
        let sys = &ctx.torus;
        let m = ctx.config.m;
        let samples = sample_positions(sys, 2 * sys.k() + 2, ENCLOSURE_STEPS)
            .into_par_iter()
            .map(|pos| {
                let (p, f) = step(sys, pos)?;
                enclosure_samples(&p, f, m)
            })
            .collect::<Result<Vec<_>>>()?
            .concat();
        Ok(envelope(&samples))
    })
}

struct PointwiseEnclosure;

impl Check for PointwiseEnclosure {
    fn name(&self) -> &'static str {
        "pointwise_enclosure"
    }

    fn tier(&self) -> Tier {
        Tier::Tracked
    }

    fn run(&self, ctx: &Context) -> Result<Outcome> {
        let fit = enclosure_fit(ctx)?;
        let mut o = Outcome {
            detail: fit_table(&[("torus", fit)]),
            ..Outcome::default()
        };
        if let Some(f) = fit {
            o.fit = Some(fit_of(&f));
            o.value = Some(f.q);
        }
        Ok(o)
    }
}

/// Random union of up to three arcs, as pieces of [0,1].
fn random_union(rng: &mut impl Rng) -> Vec<(f64, f64)> {
    let arcs = rng.gen_range(1..=3);
    let mut out = Vec::new();
    for _ in 0..arcs {
        let a: f64 = rng.gen_range(0.0..1.0);
        let e = a + rng.gen_range(0.01..0.3);
        if e <= 1.0 {
            out.push((a, e));
        } else {
            out.push((a, 1.0));
            out.push((0.0, e - 1.0));
        }
    }
    out
}

/// `∫_U |f̂|^p` over the bound of the tail-integral estimate with `q̂`.
pub fn union_ratio(
    p: &Partition,
    f: &orthospline::OrthoFunction,
    u: &[(f64, f64)],
    q: f64,
    exp: f64,
) -> Result<f64> {
    let j = char_interval(f)?;
    let basis = SplineBasis::new(p.clone());
    let fnorm = f.normalized();
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for l in 0..p.n() {
        let (a, b) = periodic_cell(p, l);
        if b <= a {
            continue;
        }
        let mut meas = 0.0;
        for &(u0, u1) in u {
            for shift in [0.0, 1.0] {
                let (lo, hi) = ((u0 + shift).max(a), (u1 + shift).min(b));
                if hi > lo {
                    meas += hi - lo;
                    lhs += lp_norm_coeffs(&basis, &fnorm, exp, Some((lo, hi)))?.powf(exp);
                }
            }
        }
        if meas > 0.0 {
            let enc = minimal_enclosure(p, j, l as isize)?;
            rhs += q.powf(exp * enc.k_count as f64) / enc.c.len().powf(exp) * meas;
        }
    }
    rhs *= j.len().powf(exp / 2.0);
    Ok(if rhs > 0.0 && lhs.powf(1.0 / exp) > DECAY_FLOOR {
        lhs / rhs
    } else {
        0.0
    })
}

struct TailUnions;

impl Check for TailUnions {
    fn name(&self) -> &'static str {
        "tail_unions"
    }

    fn tier(&self) -> Tier {
        Tier::Tracked
    }

    fn run(&self, ctx: &Context) -> Result<Outcome> {
        let q = enclosure_fit(ctx)?
            .filter(|f| f.q > 0.0 && f.q < 1.0)
            .ok_or_else(|| anyhow!("no usable pointwise decay fit"))?
            .q;
        let sys = &ctx.torus;
        let mut rng = ctx.rng(self.name());
        let positions = sample_positions(sys, 2 * sys.k() + 2, UNION_STEPS);
        let cases: Vec<(usize, Vec<(f64, f64)>)> = positions
            .iter()
            .flat_map(|&pos| (0..UNIONS_PER_STEP).map(move |_| pos))
            .map(|pos| (pos, random_union(&mut rng)))
            .collect();
        let mut o = Outcome {
            detail: Table::new(&["p", "q_hat", "cases", "max_ratio"]),
            ..Outcome::default()
        };
        let mut worst: f64 = 0.0;
        for &exp in &ctx.config.p_list {
            let r = cases
                .par_iter()
                .map(|(pos, u)| {
                    let (p, f) = step(sys, *pos)?;
                    union_ratio(&p, f, u, q, exp)
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            worst = worst.max(r);
            o.measure(format!("p{exp}"), r);
            o.detail
                .push(vec![real(exp), real(q), cases.len().to_string(), real(r)]);
        }
        o.value = Some(worst);
        Ok(o)
    }
}

/// Counts of large nested characteristic intervals and the decay rate of
/// nested chains.
struct NestedIntervals;

impl Check for NestedIntervals {
    fn name(&self) -> &'static str {
        "nested_intervals"
    }

    fn tier(&self) -> Tier {
        Tier::Tracked
    }

    fn run(&self, ctx: &Context) -> Result<Outcome> {
        let mut rng = ctx.rng(self.name());
        let mut o = Outcome {
            detail: Table::new(&["domain", "sets", "max_count", "chains", "max_kappa"]),
            ..Outcome::default()
        };
        let mut worst = 0usize;
        let mut kappa_max: f64 = 0.0;
        for (name, sys) in ctx.systems() {
            let start = ctx.config.n_k();
            let js: Vec<CharInterval> = (sys.initial_len..sys.len())
                .filter(|&pos| sys.prefix_len(pos) >= start)
                .filter_map(|pos| sys.char_interval(pos).cloned())
                .collect();
            if js.is_empty() {
                continue;
            }
            let periodic = sys.basis.partition().is_periodic();
            let mut sets: Vec<Seg> = sample_positions(sys, start, NESTED_SETS)
                .into_iter()
                .filter_map(|pos| sys.char_interval(pos).map(|j| j.j))
                .collect();
            for _ in 0..NESTED_SETS / 4 {
                let a: f64 = rng.gen_range(0.0..1.0);
                let len: f64 = rng.gen_range(0.001..0.5);
                sets.push(if periodic {
                    Seg::arc(a, (a + len).rem_euclid(1.0))
                } else {
                    Seg::interval(a * (1.0 - len), a * (1.0 - len) + len)
                });
            }
            let count = sets
                .iter()
                .map(|v| count_large_nested(&js, v, NESTED_BETA))
                .collect::<orthospline::Result<Vec<_>>>()?
                .into_iter()
                .max()
                .unwrap_or(0);
            worst = worst.max(count);
            let mut chains = 0;
            let mut kmax: f64 = 0.0;
            for _ in 0..CHAIN_POINTS {
                let x: f64 = rng.gen_range(0.0..1.0);
                let mut chain: Vec<CharInterval> = Vec::new();
                for j in &js {
                    if j.j.contains_point(x) && chain.last().is_none_or(|l| l.j.contains(&j.j)) {
                        chain.push(j.clone());
                    }
                }
                if let Some(fit) = nested_decay_ratio(&chain)? {
                    chains += 1;
                    kmax = kmax.max(fit.kappa);
                }
            }
            kappa_max = kappa_max.max(kmax);
            o.detail.push(vec![
                name.into(),
                sets.len().to_string(),
                count.to_string(),
                chains.to_string(),
                real(kmax),
            ]);
        }
        o.measure("max_kappa", kappa_max);
        o.value = Some(worst as f64);
        Ok(o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use orthospline::charint::distance_count;
    use orthospline::{build_system, Domain, KnotSequence};

    #[test]
    fn fast_distance_matches_reference() {
        let pts = [0.5, 0.25, 0.75, 0.25, 0.1, 0.9, 0.6, 0.6, 0.33];
        let seq = KnotSequence::from_points(Domain::Interval, 3, &pts).unwrap();
        let sys = build_system(&seq).unwrap();
        for pos in sys.initial_len..sys.len() {
            let (p, f) = step(&sys, pos).unwrap();
            let j = f.j.as_ref().unwrap();
            for z in p
                .knots()
                .iter()
                .copied()
                .chain([0.0, 0.05, 0.3, 0.61, 0.99, 1.0])
            {
                assert_eq!(
                    clamped_distance(&p, &j.j, z),
                    distance_count(&p, z, j).unwrap(),
                    "z={z}"
                );
            }
        }
    }
}
