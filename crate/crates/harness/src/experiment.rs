//! Experiment orchestration and the sign-pattern Monte Carlo.

use anyhow::Result;
use orthospline::analysis::{square_function, Expansion, Grid, GridFunction, DEFAULT_SUBDIVISION};
use orthospline::OrthoSystem;
use rand::Rng;
use rayon::prelude::*;

use crate::checks::{self, Check, Context};
use crate::config::ExperimentConfig;
use crate::report::VerificationReport;
use crate::streams;

#[derive(Debug, Clone, PartialEq)]
pub struct UnconditionalityReport {
    pub p: f64,
    /// `‖sum ε_n a_n f_n‖_p / ‖f‖_p` per trial, in trial order.
    pub ratios: Vec<f64>,
    pub r_max: f64,
    pub r_min: f64,
    /// `‖Sf‖_p / ‖f‖_p`, both on the Gauss nodes of the grid.
    pub r_s: f64,
    pub norm_f: f64,
}

/// Signs for one trial, drawn from the trial's own stream.
pub fn sign_pattern(seed: u64, trial: usize, len: usize) -> Vec<f64> {
    let mut rng = streams::trial(seed, trial);
    (0..len)
        .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
        .collect()
}

/// Sign-flip ratios and the square-function ratio of `sum a_n f_n` with the
/// default grid subdivision.
pub fn unconditionality_trial(
    system: &OrthoSystem,
    coeffs: &[f64],
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<UnconditionalityReport> {
    let grid = Grid::from_partition(system.basis.partition(), DEFAULT_SUBDIVISION);
    unconditionality_trial_on(system, coeffs, p, trials, seed, &grid)
}

pub fn unconditionality_trial_on(
    system: &OrthoSystem,
    coeffs: &[f64],
    p: f64,
    trials: usize,
    seed: u64,
    grid: &Grid,
) -> Result<UnconditionalityReport> {
    anyhow::ensure!(p > 1.0 && p.is_finite(), "p must lie in (1, inf), got {p}");
    let e = Expansion::new(system, coeffs.to_vec())?;
    let norm_f = e.lp_norm(p)?;
    anyhow::ensure!(norm_f > 0.0, "expansion vanishes");
    let ratios = (0..trials)
        .into_par_iter()
        .map(|t| {
            let signs = sign_pattern(seed, t, e.coeffs.len());
            Ok(e.with_signs(&signs).lp_norm(p)? / norm_f)
        })
        .collect::<Result<Vec<f64>>>()?;
    let sf = square_function(&e, grid);
    let terms = e.primal();
    let f = GridFunction::sample(grid, |x| system.basis.eval_coeffs(&terms, x));
    let r_s = sf.lp_norm(p) / f.lp_norm(p);
    let r_max = ratios.iter().copied().fold(0.0, f64::max);
    let r_min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(UnconditionalityReport {
        p,
        ratios,
        r_max,
        r_min,
        r_s,
        norm_f,
    })
}

/// Runs `selected` on the experiment of `config`. Checks run concurrently;
/// the report keeps registry order.
pub fn run_checks(
    config: &ExperimentConfig,
    selected: &[Box<dyn Check>],
) -> Result<VerificationReport> {
    config.validate()?;
    let ctx = Context::build(config)?;
    run_on(&ctx, selected)
}

pub fn run_on(ctx: &Context, selected: &[Box<dyn Check>]) -> Result<VerificationReport> {
    let records: Vec<_> = selected
        .par_iter()
        .map(|c| checks::run_check(c.as_ref(), ctx))
        .collect();
    let mut report = VerificationReport::new(&ctx.config);
    for r in records {
        report.push(r)?;
    }
    Ok(report)
}

/// Full battery.
pub fn run_experiment(config: &ExperimentConfig) -> Result<VerificationReport> {
    run_checks(config, &checks::registry())
}
