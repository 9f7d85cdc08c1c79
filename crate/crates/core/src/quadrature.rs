//! Gauss-Legendre rules and an adaptive 8/16-node integrator.

use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const MAX_NODES: usize = 64;

#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

static RULES: [OnceLock<Rule>; MAX_NODES + 1] = [const { OnceLock::new() }; MAX_NODES + 1];

/// Rule on [-1,1] with `m` nodes, exact for degree `2m-1`.
pub fn gauss_legendre(m: usize) -> &'static Rule {
    assert!((1..=MAX_NODES).contains(&m), "unsupported node count {m}");
    RULES[m].get_or_init(|| compute_rule(m))
}

fn compute_rule(m: usize) -> Rule {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(m, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    Rule { nodes, weights }
}

// P_m(x) and P_m'(x) by the three-term recurrence.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=m {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss rule with `m` nodes mapped to [a,b].
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, m: usize) -> f64 {
    let rule = gauss_legendre(m);
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&t, &w)| w * f(c + h * t))
        .sum::<f64>()
        * h
}

/// Calls `f` at each mapped node with its mapped weight.
pub fn for_each_node<F: FnMut(f64, f64)>(a: f64, b: f64, m: usize, mut f: F) {
    let rule = gauss_legendre(m);
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        f(c + h * t, w * h);
    }
}

/// Like [`for_each_node`] on `[a, a+h]`, passing the offset from `a`.
pub fn for_each_offset<F: FnMut(f64, f64)>(h: f64, m: usize, mut f: F) {
    let rule = gauss_legendre(m);
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        f(0.5 * h * (1.0 + t), 0.5 * h * w);
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    /// Accept a panel once the 8- and 16-node results differ by at most
    /// `tol` (absolute).
    pub tol: f64,
    pub max_depth: u32,
}

/// Adaptive 8 vs 16 node Gauss integration of a scalar function.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, opts: AdaptiveOptions) -> Result<f64> {
    let mut out = [0.0];
    adaptive_vec(&|x, v: &mut [f64]| v[0] = f(x), 1, a, b, opts, &mut out)?;
    Ok(out[0])
}

/// Vector-valued variant: `f(x, out)` writes `dim` values, the panel
/// error is the max-norm difference. Results are added into `acc`.
pub fn adaptive_vec<F: Fn(f64, &mut [f64])>(
    f: &F,
    dim: usize,
    a: f64,
    b: f64,
    opts: AdaptiveOptions,
    acc: &mut [f64],
) -> Result<()> {
    let mut buf = vec![0.0; dim];
    let mut lo = vec![0.0; dim];
    let mut hi = vec![0.0; dim];
    let mut stack = vec![(a, b, 0u32)];
    while let Some((a, b, depth)) = stack.pop() {
        panel(f, a, b, 8, &mut buf, &mut lo);
        panel(f, a, b, 16, &mut buf, &mut hi);
        let err = lo
            .iter()
            .zip(&hi)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        if err <= opts.tol || b - a <= 0.0 {
            acc.iter_mut().zip(&hi).for_each(|(s, v)| *s += v);
        } else if depth >= opts.max_depth {
            return Err(Error::Quadrature { a, b });
        } else {
            let mid = 0.5 * (a + b);
            stack.push((mid, b, depth + 1));
            stack.push((a, mid, depth + 1));
        }
    }
    Ok(())
}

fn panel<F: Fn(f64, &mut [f64])>(
    f: &F,
    a: f64,
    b: f64,
    m: usize,
    buf: &mut [f64],
    out: &mut [f64],
) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for_each_node(a, b, m, |x, w| {
        f(x, buf);
        out.iter_mut()
            .zip(buf.iter())
            .for_each(|(o, v)| *o += w * v);
    });
}
