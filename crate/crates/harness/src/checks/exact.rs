//! Exact checks: orthonormality, sign flips in L², Böhm's identity, the
//! Remez measure bound, level-set inclusion and the support of the
//! periodic/non-periodic difference.

use anyhow::Result;
use orthospline::analysis::{
    lambda_sweep, level_sets, remez_check, square_function, Expansion, Grid,
};
use orthospline::poly::Poly;
use orthospline::{boehm_coarsen, SplineBasis};
use rand::Rng;
use rayon::prelude::*;

use super::{sample_positions, Check, Context, Outcome};
use crate::experiment::unconditionality_trial;
use crate::report::{real, Table, Tier};

pub const ORTHO_TOL: f64 = 1e-8;
pub const SIGN_FLIP_TOL: f64 = 1e-8;
pub const BOEHM_TOL: f64 = 1e-12;
pub const BOEHM_GRID: usize = 1000;
pub const BOEHM_STEPS: usize = 16;
pub const REMEZ_RANDOM: usize = 1000;
pub const REMEZ_FUNCTIONS: usize = 8;
pub const LEVEL_R: f64 = 0.5;
pub const BETA_TOL: f64 = 1e-10;
pub const RATIO_TOL: f64 = 1e-10;

pub(super) fn checks() -> Vec<Box<dyn Check>> {
    vec![
        Box::new(Orthogonality),
        Box::new(SignFlipL2),
        Box::new(Boehm),
        Box::new(Remez),
        Box::new(LevelSetInclusion),
        Box::new(BetaSupport),
    ]
}

struct Orthogonality;

impl Check for Orthogonality {
    fn name(&self) -> &'static str {
        "orthogonality"
    }

    fn tier(&self) -> Tier {
        Tier::Exact
    }

    fn run(&self, ctx: &Context) -> Result<Outcome> {
        let mut o = Outcome {
            detail: Table::new(&["domain", "functions", "max_error"]),
            ..Outcome::default()
        };
        let mut worst: f64 = 0.0;
        for (name, sys) in ctx.systems() {
            let e = sys.orthonormality_error()?;
            worst = worst.max(e);
            o.detail
                .push(vec![name.into(), sys.len().to_string(), real(e)]);
            o.measure(format!("{name}_max_error"), e);
        }
        o.pass = Some(worst <= ORTHO_TOL);
        o.value = Some(worst);
        Ok(o)
    }
}

/// `‖sum ε_n a_n f_n‖₂ = ‖sum a_n f_n‖₂` for every drawn sign pattern.
struct SignFlipL2;

impl Check for SignFlipL2 {
    fn name(&self) -> &'static str {
        "sign_flip_l2"
    }

    fn tier(&self) -> Tier {
        Tier::Exact
    }

    fn run(&self, ctx: &Context) -> Result<Outcome> {
        let mut o = Outcome {
            detail: Table::new(&["domain", "trials", "max_deviation"]),
            ..Outcome::default()
        };
        let mut worst: f64 = 0.0;
        for (name, sys) in ctx.systems() {
            let a = ctx.coefficients(sys);
            let rep = unconditionality_trial(sys, &a, 2.0, ctx.config.trials, ctx.config.seed)?;
            let dev = rep
                .ratios
                .iter()
                .map(|r| (r - 1.0).abs())
                .fold(0.0, f64::max);
            worst = worst.max(dev);
            o.detail
                .push(vec![name.into(), rep.ratios.len().to_string(), real(dev)]);
        }
        o.pass = Some(worst <= SIGN_FLIP_TOL);
        o.value = Some(worst);
        Ok(o)
    }
}

/// Coarse B-splines rebuilt from fine ones by Böhm's weights, compared on
/// a uniform grid.
struct Boehm;

pub fn boehm_error(fine: &orthospline::Partition, i0: isize, grid: usize) -> Result<f64> {
    let map = boehm_coarsen(fine, i0)?;
    let fb = SplineBasis::new(fine.clone());
    let cb = SplineBasis::new(map.coarse.clone());
    let worst = (0..grid)
        .into_par_iter()
        .map(|s| -> Result<f64> {
            let x = s as f64 / (grid - 1) as f64;
            let fv = fb.eval_all(x)?;
            let cv = cb.eval_all(x)?;
            let mut w: f64 = 0.0;
            for (c, row) in map.rows.iter().enumerate() {
                let comb: f64 = row.iter().map(|&(i, wt)| wt * fv[fine.storage(i)]).sum();
                w = w.max((comb - cv[c]).abs());
            }
            Ok(w)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(worst.into_iter().fold(0.0, f64::max))
}

impl Check for Boehm {
    fn name(&self) -> &'static str {
        "boehm"
    }

    fn tier(&self) -> Tier {
        Tier::Exact
    }

    fn run(&self, ctx: &Context) -> Result<Outcome> {
        let mut o = Outcome {
            detail: Table::new(&["domain", "n", "i0", "max_error"]),
            ..Outcome::default()
        };
        let mut worst: f64 = 0.0;
        for (name, sys) in ctx.systems() {
            let min = if sys.basis.partition().is_periodic() {
                sys.k() + 1
            } else {
                1
            };
            for pos in sample_positions(sys, min, BOEHM_STEPS) {
                let f = &sys.functions[pos - sys.initial_len];
                let fine = sys.step_partition(sys.prefix_len(pos))?;
                let e = boehm_error(&fine, f.i0, BOEHM_GRID)?;
                worst = worst.max(e);
                o.detail.push(vec![
                    name.into(),
                    fine.n().to_string(),
                    f.i0.to_string(),
                    real(e),
                ]);
            }
        }
        o.pass = Some(worst <= BOEHM_TOL);
        o.value = Some(worst);
        Ok(o)
    }
}

/// Random polynomials of degree `< k` on random intervals, plus every
/// cell polynomial of a few system functions.
struct Remez;

impl Check for Remez {
    fn name(&self) -> &'static str {
        "remez"
    }

    fn tier(&self) -> Tier {
        Tier::Exact
    }

    fn run(&self, ctx: &Context) -> Result<Outcome> {
        let k = ctx.config.k;
        let mut rng = ctx.rng(self.name());
        let mut cases: Vec<(Poly, f64, f64)> = Vec::new();
        for _ in 0..REMEZ_RANDOM {
            let c: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a: f64 = rng.gen_range(-2.0..2.0);
            let b = a + rng.gen_range(1e-3..2.0);
            cases.push((Poly::new(c), a, b));
        }
        let random = cases.len();
        for (_, sys) in ctx.systems() {
            for pos in sample_positions(sys, 0, REMEZ_FUNCTIONS) {
                for cell in 0..sys.basis.cells().len() {
                    cases.push((sys.basis.cell_poly(cell, &sys.coeffs[pos]), 0.0, 1.0));
                }
            }
        }
        let outcomes = cases
            .par_iter()
            .map(|(p, a, b)| remez_check(p, *a, *b, k))
            .collect::<orthospline::Result<Vec<_>>>()?;
        let failures = outcomes.iter().filter(|r| !r.pass).count();
        let min_fraction = outcomes
            .iter()
            .map(|r| {
                if r.length > 0.0 {
                    r.measure / r.length
                } else {
                    1.0
                }
            })
            .fold(1.0, f64::min);
        let mut o = Outcome {
            detail: Table::new(&["source", "cases", "failures", "min_measure_fraction"]),
            ..Outcome::default()
        };
        for (src, range) in [("random", 0..random), ("cells", random..outcomes.len())] {
            let part = &outcomes[range];
            let fails = part.iter().filter(|r| !r.pass).count();
            let mf = part
                .iter()
                .map(|r| r.measure / r.length)
                .fold(1.0, f64::min);
            o.detail.push(vec![
                src.into(),
                part.len().to_string(),
                fails.to_string(),
                real(mf),
            ]);
        }
        o.measure("failures", failures as f64);
        o.pass = Some(failures == 0);
        o.value = Some(min_fraction);
        Ok(o)
    }
}

/// `E_λ ⊆ B_{λ,1/2}` over the λ sweep, for the full suite expansion and
/// its tail from the first tail point on.
struct LevelSetInclusion;

impl Check for LevelSetInclusion {
    fn name(&self) -> &'static str {
        "level_set_inclusion"
    }

    fn tier(&self) -> Tier {
        Tier::Exact
    }

    fn run(&self, ctx: &Context) -> Result<Outcome> {
        let mut o = Outcome {
            detail: Table::new(&[
                "domain",
                "expansion",
                "lambda",
                "e_measure",
                "b_measure",
                "contained",
            ]),
            ..Outcome::default()
        };
        let mut violations = 0usize;
        for (name, sys) in ctx.systems() {
            let full = Expansion::new(sys, ctx.coefficients(sys))?;
            let start = orthospline::analysis::position_of_point(sys, ctx.config.n_k());
            let tail = full.restricted(|i| i >= start);
            let grid = Grid::from_partition(sys.basis.partition(), ctx.config.m);
            for (label, e) in [("full", &full), ("tail", &tail)] {
                let s = square_function(e, &grid);
                let max = s.values.iter().fold(0.0f64, |m, v| m.max(*v));
                for lambda in lambda_sweep(max) {
                    let ls = level_sets(&s, lambda, LEVEL_R)?;
                    let ok = ls.contained();
                    if !ok {
                        violations += 1;
                    }
                    o.detail.push(vec![
                        name.into(),
                        label.into(),
                        real(lambda),
                        real(ls.e_measure),
                        real(ls.b_measure),
                        ok.to_string(),
                    ]);
                }
            }
        }
        o.pass = Some(violations == 0);
        o.value = Some(violations as f64);
        Ok(o)
    }
}

/// Constant ratio `α_j/α̂_j` off the boundary set and `β_j = 0` there.
struct BetaSupport;

impl Check for BetaSupport {
    fn name(&self) -> &'static str {
        "beta_support"
    }

    fn tier(&self) -> Tier {
        Tier::Exact
    }

    fn run(&self, ctx: &Context) -> Result<Outcome> {
        let comps = super::ortho::comparisons(ctx)?;
        let mut o = Outcome {
            detail: Table::new(&["n", "i0", "c", "c_spread", "max_off_b_rel", "max_beta_rel"]),
            ..Outcome::default()
        };
        let (mut spread, mut off) = (0.0f64, 0.0f64);
        let (mut cmin, mut cmax) = (f64::INFINITY, 0.0f64);
        for c in &comps {
            let r = &c.report;
            let rel = r.max_off_b_residual / r.norm_g;
            spread = spread.max(r.c_spread);
            off = off.max(rel);
            cmin = cmin.min(r.c);
            cmax = cmax.max(r.c);
            o.detail.push(vec![
                c.n.to_string(),
                r.i0.to_string(),
                real(r.c),
                real(r.c_spread),
                real(rel),
                real(r.max_beta() / r.norm_g),
            ]);
        }
        o.measure("cases", comps.len() as f64);
        o.measure("max_c_spread", spread);
        o.measure("c_min", cmin);
        o.measure("c_max", cmax);
        o.pass = Some(!comps.is_empty() && spread <= RATIO_TOL && off <= BETA_TOL);
        o.value = Some(off);
        Ok(o)
    }
}
