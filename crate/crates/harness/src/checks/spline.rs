//! B-spline stability, Gram-inverse decay and projection norms on the
//! final partitions.

use std::sync::Arc;

use anyhow::Result;
use orthospline::bspline::lp_norm_coeffs;
use orthospline::{build_gram, Partition, SplineBasis};
use rand::Rng;

use super::{fit_of, fit_table, Check, Context, Outcome};
use crate::report::{real, Table, Tier};

pub const STABILITY_DRAWS: usize = 20;
pub const LOCAL_DRAWS: usize = 5;

pub(super) fn checks() -> Vec<Box<dyn Check>> {
    vec![
        Box::new(Stability),
        Box::new(LocalCoefficient),
        Box::new(GramDecay { periodic: false }),
        Box::new(GramDecay { periodic: true }),
        Box::new(ProjectionNorm),
    ]
}

/// `‖sum a_j N_j‖_p / ‖(a_j ν_j^{1/p})‖_{ℓ^p}` over random coefficients.
struct Stability;

pub fn stability_ratio(part: &Partition, basis: &SplineBasis, a: &[f64], p: f64) -> Result<f64> {
    let g = lp_norm_coeffs(basis, a, p, None)?;
    let seq: f64 = part
        .indices()
        .map(|i| a[part.storage(i)].abs().powf(p) * part.nu(i))
        .sum::<f64>()
        .powf(1.0 / p);
    Ok(g / seq)
}

impl Check for Stability {
    fn name(&self) -> &'static str {
        "bspline_stability"
    }

    fn tier(&self) -> Tier {
        Tier::Tracked
    }

    fn run(&self, ctx: &Context) -> Result<Outcome> {
        let mut rng = ctx.rng(self.name());
        let mut o = Outcome {
            detail: Table::new(&["domain", "p", "min_ratio", "max_ratio"]),
            ..Outcome::default()
        };
        let mut worst: f64 = 0.0;
        for (name, sys) in ctx.systems() {
            let basis = &sys.basis;
            let part = basis.partition();
            for &p in &ctx.config.p_list {
                let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
                for _ in 0..STABILITY_DRAWS {
                    let a: Vec<f64> = (0..basis.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let r = stability_ratio(part, basis, &a, p)?;
                    lo = lo.min(r);
                    hi = hi.max(r);
                }
                worst = worst.max(1.0 / lo);
                o.detail
                    .push(vec![name.into(), real(p), real(lo), real(hi)]);
            }
        }
        // constant of the lower bound ‖(a_j ν_j^{1/p})‖ <= C ‖g‖_p
        o.value = Some(worst);
        Ok(o)
    }
}

/// `|a_j| |L_j|^{1/p} / ‖g‖_{L^p(L_j)}` with `L_j` the largest knot
/// interval in `supp N_j`.
struct LocalCoefficient;

pub fn local_coefficient_constant(
    part: &Partition,
    basis: &SplineBasis,
    a: &[f64],
    p: f64,
) -> Result<f64> {
    let k = part.k() as isize;
    let mut worst: f64 = 0.0;
    for i in part.indices() {
        let (mut best, mut len) = (0.0, 0.0);
        for l in i..i + k {
            let w = part.tau(l + 1) - part.tau(l);
            if w > len {
                len = w;
                best = part.tau(l);
            }
        }
        let local = lp_norm_coeffs(basis, a, p, Some((best, best + len)))?;
        worst = worst.max(a[part.storage(i)].abs() * len.powf(1.0 / p) / local);
    }
    Ok(worst)
}

impl Check for LocalCoefficient {
    fn name(&self) -> &'static str {
        "local_coefficient"
    }

    fn tier(&self) -> Tier {
        Tier::Tracked
    }

    fn run(&self, ctx: &Context) -> Result<Outcome> {
        let mut rng = ctx.rng(self.name());
        let mut o = Outcome {
            detail: Table::new(&["domain", "p", "constant"]),
            ..Outcome::default()
        };
        let mut worst: f64 = 0.0;
        for (name, sys) in ctx.systems() {
            let basis = &sys.basis;
            for &p in &ctx.config.p_list {
                let mut c: f64 = 0.0;
                for _ in 0..LOCAL_DRAWS {
                    let a: Vec<f64> = (0..basis.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    c = c.max(local_coefficient_constant(basis.partition(), basis, &a, p)?);
                }
                worst = worst.max(c);
                o.detail.push(vec![name.into(), real(p), real(c)]);
            }
        }
        o.value = Some(worst);
        Ok(o)
    }
}

/// Envelope fit `|a_ij| D_ij <= C q^{d(i,j)}` of the Gram inverse.
struct GramDecay {
    periodic: bool,
}

impl Check for GramDecay {
    fn name(&self) -> &'static str {
        if self.periodic {
            "gram_decay_periodic"
        } else {
            "gram_decay"
        }
    }

    fn tier(&self) -> Tier {
        Tier::Tracked
    }

    fn run(&self, ctx: &Context) -> Result<Outcome> {
        let (label, sys) = if self.periodic {
            ("torus", &ctx.torus)
        } else {
            ("interval", &ctx.interval)
        };
        let gram = build_gram(sys.basis.clone())?;
        let fit = gram.fit_decay();
        let ok = fit.distances > 0;
        let mut o = Outcome {
            detail: fit_table(&[(label, ok.then_some(fit))]),
            ..Outcome::default()
        };
        if ok {
            o.fit = Some(fit_of(&fit));
            o.value = Some(fit.q);
            o.measure("residual", fit.residual);
        }
        Ok(o)
    }
}

/// Lower bound for the L∞ norm of the orthogonal projection.
struct ProjectionNorm;

impl Check for ProjectionNorm {
    fn name(&self) -> &'static str {
        "projection_norm"
    }

    fn tier(&self) -> Tier {
        Tier::Tracked
    }

    fn run(&self, ctx: &Context) -> Result<Outcome> {
        let mut o = Outcome {
            detail: Table::new(&["domain", "samples_per_cell", "norm"]),
            ..Outcome::default()
        };
        let mut worst: f64 = 0.0;
        for (name, sys) in ctx.systems() {
            let gram = build_gram(Arc::clone(&sys.basis))?;
            let v = gram.projection_infinity_norm(ctx.config.m);
            worst = worst.max(v);
            o.detail
                .push(vec![name.into(), ctx.config.m.to_string(), real(v)]);
        }
        o.value = Some(worst);
        Ok(o)
    }
}
