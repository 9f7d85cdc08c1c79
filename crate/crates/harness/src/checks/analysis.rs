//! Maximal-function domination, the polynomial-projection construction,
//! the square-function lemmas and the sign-pattern trials.

use anyhow::Result;
use orthospline::analysis::{
    domination_check, lemma_techn_inequalities_with, level_set_ratio, moment_annihilation,
    square_function, Expansion, Grid, PowerCache, TechnOptions,
};
use orthospline::charint::Seg;
use rand::Rng;

use super::{sample_positions, Check, Context, Outcome};
use crate::experiment::unconditionality_trial_on;
use crate::report::{opt_real, real, Table, Tier};

pub const SPIKE_WIDTH: f64 = 1e-3;
pub const STEP_LEVELS: usize = 8;
pub const ANNIHILATION_SETS: usize = 8;
pub const TECHN_SETS: usize = 4;
pub const SF_LEVELS: [f64; 3] = [0.1, 0.3, 0.5];
pub const SF_R: f64 = 0.5;

pub(super) fn checks() -> Vec<Box<dyn Check>> {
    vec![
        Box::new(Domination),
        Box::new(Annihilation),
        Box::new(TechnLemmas),
        Box::new(SquareFunctionSplit),
        Box::new(Unconditionality),
    ]
}

/// `sup_m |P_m h| / M h` for a narrow spike and a random step function.
struct Domination;

impl Check for Domination {
    fn name(&self) -> &'static str {
        "domination"
    }

    fn tier(&self) -> Tier {
        Tier::Tracked
    }

    fn run(&self, ctx: &Context) -> Result<Outcome> {
        let mut rng = ctx.rng(self.name());
        let x0: f64 = rng.gen_range(0.1..0.9);
        let (s0, s1) = (x0, x0 + SPIKE_WIDTH);
        let spike = move |x: f64| if x >= s0 && x < s1 { 1.0 } else { 0.0 };
        let mut breaks: Vec<f64> = (0..STEP_LEVELS - 1)
            .map(|_| rng.gen_range(0.0..1.0))
            .collect();
        breaks.sort_by(f64::total_cmp);
        let levels: Vec<f64> = (0..STEP_LEVELS).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let br = breaks.clone();
        let step = move |x: f64| levels[br.partition_point(|&b| b <= x)];
        let mut o = Outcome {
            detail: Table::new(&[
                "domain",
                "function",
                "sup_ratio",
                "points",
                "excluded",
                "l2_ratio",
            ]),
            ..Outcome::default()
        };
        let mut worst: f64 = 0.0;
        let mut l2: f64 = 0.0;
        for (name, sys) in ctx.systems() {
            let cases: [(&str, &(dyn Fn(f64) -> f64 + Sync), Vec<f64>); 2] = [
                ("spike", &spike, vec![s0, s1]),
                ("step", &step, breaks.clone()),
            ];
            for (label, h, b) in cases {
                let r = domination_check(sys, &h, &b, ctx.config.m)?;
                worst = worst.max(r.stats.ratio);
                l2 = l2.max(r.l2_ratio);
                o.detail.push(vec![
                    name.into(),
                    label.into(),
                    real(r.stats.ratio),
                    r.stats.points.to_string(),
                    r.stats.excluded.to_string(),
                    real(r.l2_ratio),
                ]);
            }
        }
        o.measure("max_l2_ratio", l2);
        o.value = Some(worst);
        Ok(o)
    }
}

// Random arc of length in [0.02, 0.3).
fn random_arc(rng: &mut impl Rng) -> Seg {
    let a: f64 = rng.gen_range(0.0..1.0);
    let len: f64 = rng.gen_range(0.02..0.3);
    Seg::arc(a, (a + len).rem_euclid(1.0))
}

/// `⟨(h - T_V h) 1_V, f̂_n⟩ = 0` for the functions preceding the first knot
/// inside V.
struct Annihilation;

impl Check for Annihilation {
    fn name(&self) -> &'static str {
        "moment_annihilation"
    }

    fn tier(&self) -> Tier {
        Tier::Tracked
    }

    fn run(&self, ctx: &Context) -> Result<Outcome> {
        let mut rng = ctx.rng(self.name());
        let sys = &ctx.torus;
        let h = |s: f64| (3.0 * s).exp() * (13.0 * s).sin();
        let mut o = Outcome {
            detail: Table::new(&["v_a", "v_e", "checked", "max_residual"]),
            ..Outcome::default()
        };
        let mut worst: f64 = 0.0;
        for _ in 0..ANNIHILATION_SETS {
            let v = random_arc(&mut rng);
            let r = moment_annihilation(sys, &v, &h)?;
            worst = worst.max(r.max_residual);
            o.detail.push(vec![
                real(v.a),
                real(v.e),
                r.checked.to_string(),
                real(r.max_residual),
            ]);
        }
        o.value = Some(worst);
        Ok(o)
    }
}

/// Tail-mass ratio over V and weighted tail sums, V the hull of sampled
/// periodic characteristic intervals.
struct TechnLemmas;

impl Check for TechnLemmas {
    fn name(&self) -> &'static str {
        "techn_lemmas"
    }

    fn tier(&self) -> Tier {
        Tier::Tracked
    }

    fn run(&self, ctx: &Context) -> Result<Outcome> {
        let sys = &ctx.torus;
        let e = Expansion::new(sys, ctx.coefficients(sys))?;
        let mut opts = TechnOptions::new(ctx.config.k);
        opts.start = ctx.config.n_k();
        opts.p = ctx.config.p_list[0];
        opts.m = ctx.config.m;
        let mut cols = vec![
            "v_a".to_string(),
            "v_e".into(),
            "gamma".into(),
            "tail_ratio".into(),
        ];
        cols.extend(opts.radii.iter().map(|r| format!("weighted_r{r}")));
        let mut o = Outcome {
            detail: Table {
                columns: cols,
                rows: Vec::new(),
            },
            ..Outcome::default()
        };
        let mut tail_max: f64 = 0.0;
        let mut weighted_max = vec![0.0f64; opts.radii.len()];
        let cache = PowerCache::new(sys, opts.p);
        for pos in sample_positions(sys, opts.start, TECHN_SETS) {
            let Some(j) = sys.char_interval(pos) else {
                continue;
            };
            let v = j.hull;
            let r = lemma_techn_inequalities_with(&e, &v, &opts, &cache)?;
            tail_max = tail_max.max(r.tail_ratio.unwrap_or(0.0));
            let mut row = vec![
                real(v.a),
                real(v.e),
                r.gamma.to_string(),
                opt_real(r.tail_ratio),
            ];
            for (i, (_, w)) in r.weighted.iter().enumerate() {
                weighted_max[i] = weighted_max[i].max(w.unwrap_or(0.0));
                row.push(opt_real(*w));
            }
            o.detail.push(row);
        }
        for (r, w) in opts.radii.iter().zip(&weighted_max) {
            o.measure(format!("weighted_r{r}"), *w);
        }
        o.value = Some(tail_max);
        Ok(o)
    }
}

/// `∫_E Sg² / ∫_{E^c} Sg²` for the tail terms whose intervals leave
/// `B_{λ,1/2}`.
struct SquareFunctionSplit;

impl Check for SquareFunctionSplit {
    fn name(&self) -> &'static str {
        "square_function_split"
    }

    fn tier(&self) -> Tier {
        Tier::Tracked
    }

    fn run(&self, ctx: &Context) -> Result<Outcome> {
        let sys = &ctx.torus;
        let e = Expansion::new(sys, ctx.coefficients(sys))?;
        let grid = Grid::from_partition(sys.basis.partition(), ctx.config.m);
        let start = orthospline::analysis::position_of_point(sys, ctx.config.n_k());
        let smax = square_function(&e.restricted(|i| i >= start), &grid)
            .values
            .iter()
            .fold(0.0f64, |m, v| m.max(*v));
        let mut o = Outcome {
            detail: Table::new(&["lambda", "lambda_count", "ratio"]),
            ..Outcome::default()
        };
        let mut worst: f64 = 0.0;
        for frac in SF_LEVELS {
            let r = level_set_ratio(&e, frac * smax, SF_R, ctx.config.n_k(), ctx.config.m)?;
            worst = worst.max(r.ratio.unwrap_or(0.0));
            o.detail.push(vec![
                real(r.lambda),
                r.lambda_count.to_string(),
                opt_real(r.ratio),
            ]);
        }
        o.value = Some(worst);
        Ok(o)
    }
}

/// `r_max` and `r_S` for every configured exponent.
struct Unconditionality;

impl Check for Unconditionality {
    fn name(&self) -> &'static str {
        "unconditionality"
    }

    fn tier(&self) -> Tier {
        Tier::Tracked
    }

    fn run(&self, ctx: &Context) -> Result<Outcome> {
        let mut o = Outcome {
            detail: Table::new(&["domain", "p", "trials", "r_max", "r_min", "r_s"]),
            ..Outcome::default()
        };
        let mut worst: f64 = 0.0;
        for (name, sys) in ctx.systems() {
            let a = ctx.coefficients(sys);
            let grid = Grid::from_partition(sys.basis.partition(), ctx.config.m);
            for &p in &ctx.config.p_list {
                let r = unconditionality_trial_on(
                    sys,
                    &a,
                    p,
                    ctx.config.trials,
                    ctx.config.seed,
                    &grid,
                )?;
                worst = worst.max(r.r_max);
                o.measure(format!("{name}_p{p}_r_max"), r.r_max);
                o.measure(format!("{name}_p{p}_r_s"), r.r_s);
                o.detail.push(vec![
                    name.into(),
                    real(p),
                    r.ratios.len().to_string(),
                    real(r.r_max),
                    real(r.r_min),
                    real(r.r_s),
                ]);
            }
        }
        o.value = Some(worst);
        Ok(o)
    }
}
