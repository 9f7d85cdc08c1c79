//! L∞-normalized B-spline bases on clamped and periodic partitions.

use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::knots::{Partition, PartitionKind};
use crate::poly::Poly;
use crate::quadrature::{self, AdaptiveOptions};

/// A nondegenerate knot interval `[a,b]` inside [0,1]. Inside the cell the
/// active basis functions are `span-k+1 ..= span`, evaluated at `x + shift`
/// (periodic cells left of `sigma_0` live one period up).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub a: f64,
    pub b: f64,
    pub span: isize,
    pub shift: f64,
}

impl Cell {
    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn is_empty(&self) -> bool {
        self.b <= self.a
    }
}

#[derive(Debug)]
pub struct SplineBasis {
    partition: Partition,
    cells: Vec<Cell>,
    // per cell, per active function: polynomial in t = (x-a)/(b-a)
    polys: OnceLock<Vec<Vec<Poly>>>,
}

impl PartialEq for SplineBasis {
    fn eq(&self, other: &Self) -> bool {
        self.partition == other.partition
    }
}

impl SplineBasis {
    pub fn new(partition: Partition) -> Self {
        let mut basis = Self {
            partition,
            cells: Vec::new(),
            polys: OnceLock::new(),
        };
        let bp = basis.partition.breakpoints();
        basis.cells = bp
            .windows(2)
            .map(|w| {
                let (span, y) = basis.locate(0.5 * (w[0] + w[1]));
                let mid = 0.5 * (w[0] + w[1]);
                Cell {
                    a: w[0],
                    b: w[1],
                    span,
                    shift: y - mid,
                }
            })
            .collect();
        basis
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn k(&self) -> usize {
        self.partition.k()
    }

    pub fn dim(&self) -> usize {
        self.partition.dim()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Index of the cell containing `x` (right-continuous, left limit at 1).
    pub fn cell_index(&self, x: f64) -> usize {
        let i = self.cells.partition_point(|c| c.b <= x);
        i.min(self.cells.len() - 1)
    }

    // (span, evaluation abscissa) for x in [0,1].
    fn locate(&self, x: f64) -> (isize, f64) {
        let p = &self.partition;
        let pts = p.interior();
        match p.kind() {
            PartitionKind::Clamped => {
                let below = pts.partition_point(|&t| t <= x) as isize;
                let s = if x >= 1.0 {
                    p.n() as isize - 1
                } else {
                    below - 1
                };
                (s, x.min(1.0))
            }
            PartitionKind::Periodic => {
                let x = if x >= 1.0 { x - 1.0 } else { x };
                let y = if x < pts[0] { x + 1.0 } else { x };
                let s = pts.partition_point(|&t| t <= y) as isize - 1;
                (s, y)
            }
        }
    }

    /// Values of `N_{span-k+1} ..= N_{span}` at abscissa `y` (de Boor's
    /// triangular recurrence). Indices are extended, not wrapped.
    pub fn eval_span(&self, span: isize, y: f64, out: &mut [f64]) {
        self.recur(span, out, |t| y - t, |t| t - y);
    }

    /// Same values at `base + s`, with `base` a cell end in span
    /// coordinates. Knot differences are formed before the offset is added,
    /// so cells far shorter than their position keep full relative accuracy.
    pub fn eval_span_offset(&self, span: isize, base: f64, s: f64, out: &mut [f64]) {
        self.recur(span, out, |t| (base - t) + s, |t| (t - base) - s);
    }

    fn recur<L: Fn(f64) -> f64, R: Fn(f64) -> f64>(
        &self,
        span: isize,
        out: &mut [f64],
        left_of: L,
        right_of: R,
    ) {
        let k = self.k();
        let p = &self.partition;
        let mut left = [0.0f64; 16];
        let mut right = [0.0f64; 16];
        out[0] = 1.0;
        for j in 1..k {
            left[j] = left_of(p.tau(span + 1 - j as isize));
            right[j] = right_of(p.tau(span + j as isize));
            let mut saved = 0.0;
            for r in 0..j {
                let temp = out[r] / (right[r + 1] + left[j - r]);
                out[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            out[j] = saved;
        }
    }

    /// Nonzero basis values at `x`; returns the extended index of `out[0]`.
    pub fn eval_nonzero(&self, x: f64, out: &mut [f64]) -> Result<isize> {
        self.check_x(x)?;
        let (s, y) = self.locate(x);
        self.eval_span(s, y, out);
        Ok(s + 1 - self.k() as isize)
    }

    pub fn eval_basis(&self, i: isize, x: f64) -> Result<f64> {
        self.partition.check_index(i)?;
        let mut buf = [0.0; 16];
        let first = self.eval_nonzero(x, &mut buf)?;
        let target = self.partition.storage(i);
        Ok((0..self.k())
            .filter(|&r| self.partition.storage(first + r as isize) == target)
            .map(|r| buf[r])
            .sum())
    }

    /// Dense vector of all basis values at `x` in storage order.
    pub fn eval_all(&self, x: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        let mut buf = [0.0; 16];
        let first = self.eval_nonzero(x, &mut buf)?;
        for r in 0..self.k() {
            out[self.partition.storage(first + r as isize)] += buf[r];
        }
        Ok(out)
    }

    fn check_x(&self, x: f64) -> Result<()> {
        let ok = match self.partition.kind() {
            PartitionKind::Clamped => (0.0..=1.0).contains(&x),
            PartitionKind::Periodic => (0.0..=1.0).contains(&x),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::OutOfDomain(x))
        }
    }

    /// Evaluates `sum_j c_j N_j(x)` for storage-ordered coefficients.
    pub fn eval_coeffs(&self, coeffs: &[f64], x: f64) -> f64 {
        let c = self.cell_index(x.clamp(0.0, 1.0));
        self.eval_coeffs_in_cell(c, coeffs, x)
    }

    pub fn eval_coeffs_in_cell(&self, cell: usize, coeffs: &[f64], x: f64) -> f64 {
        let cell = self.cells[cell];
        let mut buf = [0.0; 16];
        self.eval_span(cell.span, x + cell.shift, &mut buf);
        let first = cell.span + 1 - self.k() as isize;
        (0..self.k())
            .map(|r| buf[r] * coeffs[self.partition.storage(first + r as isize)])
            .sum()
    }

    /// Storage slots of the active functions in a cell, in span order.
    pub fn cell_slots(&self, cell: usize) -> impl Iterator<Item = usize> + '_ {
        let first = self.cells[cell].span + 1 - self.k() as isize;
        (0..self.k()).map(move |r| self.partition.storage(first + r as isize))
    }

    /// Active basis functions on each cell as polynomials in the local
    /// variable `t = (x-a)/(b-a)`.
    pub fn cell_polys(&self) -> &[Vec<Poly>] {
        self.polys.get_or_init(|| {
            let k = self.k();
            let ts: Vec<f64> = (0..k)
                .map(|i| {
                    if k == 1 {
                        0.5
                    } else {
                        0.5 - 0.5 * (std::f64::consts::PI * (i as f64 + 0.5) / k as f64).cos()
                    }
                })
                .collect();
            let vander = DMatrix::from_fn(k, k, |i, j| ts[i].powi(j as i32));
            let lu = vander.lu();
            let mut buf = [0.0; 16];
            self.cells
                .iter()
                .map(|cell| {
                    let mut vals = DMatrix::zeros(k, k);
                    for (i, &t) in ts.iter().enumerate() {
                        self.eval_span_offset(cell.span, cell.a + cell.shift, t * cell.len(), &mut buf);
                        for r in 0..k {
                            vals[(i, r)] = buf[r];
                        }
                    }
                    let coef = lu.solve(&vals).expect("Chebyshev Vandermonde is regular");
                    (0..k)
                        .map(|r| Poly::new(coef.column(r).iter().copied().collect()))
                        .collect()
                })
                .collect()
        })
    }

    /// Local polynomial of `sum_j c_j N_j` on one cell.
    pub fn cell_poly(&self, cell: usize, coeffs: &[f64]) -> Poly {
        let polys = &self.cell_polys()[cell];
        let k = self.k();
        let mut c = vec![0.0; k];
        for (r, slot) in self.cell_slots(cell).enumerate() {
            let a = coeffs[slot];
            for (d, v) in polys[r].c.iter().enumerate() {
                c[d] += a * v;
            }
        }
        Poly::new(c)
    }

    pub fn supports(&self) -> Vec<f64> {
        self.partition
            .indices()
            .map(|i| self.partition.nu(i))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Repr {
    Primal,
    Dual,
}

/// Coefficients with respect to `N` (primal) or the biorthogonal `N*`
/// (dual), in storage order.
#[derive(Debug, Clone)]
pub struct Spline {
    pub basis: Arc<SplineBasis>,
    pub repr: Repr,
    pub coeffs: Vec<f64>,
}

impl Spline {
    pub fn new(basis: Arc<SplineBasis>, repr: Repr, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.dim() {
            return Err(Error::Degenerate(format!(
                "{} coefficients for dimension {}",
                coeffs.len(),
                basis.dim()
            )));
        }
        Ok(Self {
            basis,
            repr,
            coeffs,
        })
    }

    pub fn primal(basis: Arc<SplineBasis>, coeffs: Vec<f64>) -> Result<Self> {
        Self::new(basis, Repr::Primal, coeffs)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.require_primal()?;
        self.basis.check_x(x)?;
        Ok(self.basis.eval_coeffs(&self.coeffs, x))
    }

    fn require_primal(&self) -> Result<()> {
        match self.repr {
            Repr::Primal => Ok(()),
            Repr::Dual => Err(Error::Unsupported(
                "dual representation; convert with GramSystem::dual_to_primal".into(),
            )),
        }
    }
}

fn same_basis(a: &Arc<SplineBasis>, b: &Arc<SplineBasis>) -> bool {
    Arc::ptr_eq(a, b) || a.partition() == b.partition()
}

/// Exact `∫ f g` by k-point Gauss per knot interval.
pub fn inner_product(f: &Spline, g: &Spline) -> Result<f64> {
    f.require_primal()?;
    g.require_primal()?;
    if !same_basis(&f.basis, &g.basis) {
        return Err(Error::PartitionMismatch);
    }
    Ok(inner_product_coeffs(&f.basis, &f.coeffs, &g.coeffs))
}

pub fn inner_product_coeffs(basis: &SplineBasis, a: &[f64], b: &[f64]) -> f64 {
    let k = basis.k();
    let mut total = 0.0;
    for (ci, cell) in basis.cells().iter().enumerate() {
        quadrature::for_each_node(cell.a, cell.b, k, |x, w| {
            total += w * basis.eval_coeffs_in_cell(ci, a, x) * basis.eval_coeffs_in_cell(ci, b, x);
        });
    }
    total
}

/// Splits `[u,v]` (periodic: extended coordinates, possibly wrapping) into
/// pieces of [0,1].
pub(crate) fn domain_pieces(periodic: bool, sub: Option<(f64, f64)>) -> Vec<(f64, f64)> {
    let Some((u, v)) = sub else {
        return vec![(0.0, 1.0)];
    };
    if !periodic {
        return vec![(u.max(0.0), v.min(1.0))];
    }
    if v - u >= 1.0 {
        return vec![(0.0, 1.0)];
    }
    let s = u.rem_euclid(1.0);
    let e = s + (v - u);
    if e <= 1.0 {
        vec![(s, e)]
    } else {
        vec![(s, 1.0), (0.0, e - 1.0)]
    }
}

/// Samples per cell used by the L∞ norm before critical-point refinement.
pub const SUP_SAMPLES: usize = 256;

const TOL_FLOOR: f64 = 1e-290;

/// `‖f‖_{L^p(sub)}`. Even integer p uses exact Gauss; other finite p split
/// each cell at the zeros of f and integrate `|f|^p` adaptively (8 vs 16
/// nodes, relative 1e-10, depth 20); p = ∞ samples every cell and then
/// refines at the critical points of the local polynomial.
pub fn lp_norm(f: &Spline, p: f64, sub: Option<(f64, f64)>) -> Result<f64> {
    f.require_primal()?;
    lp_norm_coeffs(&f.basis, &f.coeffs, p, sub)
}

pub fn lp_norm_coeffs(
    basis: &SplineBasis,
    coeffs: &[f64],
    p: f64,
    sub: Option<(f64, f64)>,
) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    let pieces = domain_pieces(basis.partition().is_periodic(), sub);
    let mut segs = Vec::new();
    for (u, v) in pieces {
        if v <= u {
            continue;
        }
        let first = basis.cell_index(u);
        for ci in first..basis.cells().len() {
            let c = basis.cells()[ci];
            if c.a >= v {
                break;
            }
            let (lo, hi) = (c.a.max(u), c.b.min(v));
            if hi > lo {
                segs.push((ci, lo, hi));
            }
        }
    }
    if p.is_infinite() {
        let mut m: f64 = 0.0;
        for &(ci, lo, hi) in &segs {
            let c = basis.cells()[ci];
            let poly = basis.cell_poly(ci, coeffs);
            let (tl, th) = ((lo - c.a) / c.len(), (hi - c.a) / c.len());
            for s in 0..=SUP_SAMPLES {
                let t = tl + (th - tl) * s as f64 / SUP_SAMPLES as f64;
                m = m.max(poly.eval(t).abs());
            }
            for r in poly.derivative().roots_in(tl, th) {
                m = m.max(poly.eval(r).abs());
            }
        }
        return Ok(m);
    }
    let s: f64 = segment_powers(basis, coeffs, p, &segs)?.iter().sum();
    Ok(s.powf(1.0 / p))
}

// `∫ |f|^p` over each `(cell, lo, hi)` segment, finite `p`, with one
// tolerance for all segments.
fn segment_powers(
    basis: &SplineBasis,
    coeffs: &[f64],
    p: f64,
    segs: &[(usize, f64, f64)],
) -> Result<Vec<f64>> {
    let k = basis.k();
    if p.fract() == 0.0 && (p as u64) % 2 == 0 {
        let m = ((p * (k as f64 - 1.0) + 1.0) / 2.0).ceil().max(1.0) as usize;
        return Ok(segs
            .iter()
            .map(|&(ci, lo, hi)| {
                quadrature::integrate(
                    |x| basis.eval_coeffs_in_cell(ci, coeffs, x).powf(p),
                    lo,
                    hi,
                    m.min(quadrature::MAX_NODES),
                )
            })
            .collect());
    }
    // zero-free pieces, then adaptive integration against a global scale
    let mut panels = Vec::new();
    for (si, &(ci, lo, hi)) in segs.iter().enumerate() {
        let c = basis.cells()[ci];
        let poly = basis.cell_poly(ci, coeffs);
        let (tl, th) = ((lo - c.a) / c.len(), (hi - c.a) / c.len());
        let mut cuts = vec![tl];
        cuts.extend(
            poly.roots_in(tl, th)
                .into_iter()
                .filter(|&r| r > tl && r < th),
        );
        cuts.push(th);
        for w in cuts.windows(2) {
            panels.push((si, ci, c.a + w[0] * c.len(), c.a + w[1] * c.len()));
        }
    }
    let rough: f64 = panels
        .iter()
        .map(|&(_, ci, lo, hi)| {
            quadrature::integrate(
                |x| basis.eval_coeffs_in_cell(ci, coeffs, x).abs().powf(p),
                lo,
                hi,
                16,
            )
        })
        .sum();
    let mut out = vec![0.0; segs.len()];
    if rough == 0.0 {
        return Ok(out);
    }
    // the absolute floor keeps underflowing |f|^p from stalling the rule
    let opts = AdaptiveOptions {
        tol: (1e-10 * rough / (panels.len() as f64).sqrt()).max(TOL_FLOOR),
        max_depth: 20,
    };
    for &(si, ci, lo, hi) in &panels {
        out[si] += quadrature::adaptive(
            &|x| basis.eval_coeffs_in_cell(ci, coeffs, x).abs().powf(p),
            lo,
            hi,
            opts,
        )?;
    }
    Ok(out)
}

/// `∫ |f|^p` over each cell, for finite `p`, all cells sharing one
/// absolute tolerance.
pub fn cell_powers(basis: &SplineBasis, coeffs: &[f64], p: f64) -> Result<Vec<f64>> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    let segs: Vec<(usize, f64, f64)> = basis
        .cells()
        .iter()
        .enumerate()
        .map(|(i, c)| (i, c.a, c.b))
        .collect();
    segment_powers(basis, coeffs, p, &segs)
}

/// `∫_sub |f|^p` from running sums of [`cell_powers`] (`prefix[i]` sums
/// the first `i` cells); only the two boundary cells are integrated.
pub fn power_on(
    basis: &SplineBasis,
    coeffs: &[f64],
    prefix: &[f64],
    p: f64,
    sub: (f64, f64),
) -> Result<f64> {
    let cells = basis.cells();
    let mut s = 0.0;
    for (u, v) in domain_pieces(basis.partition().is_periodic(), Some(sub)) {
        if v <= u {
            continue;
        }
        let (cu, cv) = (basis.cell_index(u), basis.cell_index(v));
        if cu == cv {
            s += lp_norm_coeffs(basis, coeffs, p, Some((u, v)))?.powf(p);
            continue;
        }
        s += lp_norm_coeffs(basis, coeffs, p, Some((u, cells[cu].b)))?.powf(p);
        s += prefix[cv] - prefix[cu + 1];
        if v > cells[cv].a {
            s += lp_norm_coeffs(basis, coeffs, p, Some((cells[cv].a, v)))?.powf(p);
        }
    }
    Ok(s)
}

/// Coarse-to-fine relation of Böhm's knot insertion: coarse storage slot
/// `c` expands as `sum (weight * N_fine[index])` over `rows[c]`.
#[derive(Debug, Clone)]
pub struct BoehmMap {
    pub coarse: Partition,
    pub i0: isize,
    pub rows: Vec<Vec<(isize, f64)>>,
}

impl BoehmMap {
    /// Fine coefficients of `sum_c coarse[c] * Ñ_c`.
    pub fn refine(&self, fine: &Partition, coarse: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; fine.dim()];
        for (c, row) in self.rows.iter().enumerate() {
            for &(i, w) in row {
                out[fine.storage(i)] += w * coarse[c];
            }
        }
        out
    }
}

/// Expresses each coarse B-spline `Ñ_i` (fine partition with `tau_{i0}`
/// removed) in the fine basis: identity left of `i0-k`, two terms on
/// `i0-k..i0-1`, index shift by one from `i0` on.
pub fn boehm_coarsen(fine: &Partition, i0: isize) -> Result<BoehmMap> {
    let k = fine.k() as isize;
    let n = fine.n() as isize;
    if !(0..n).contains(&i0) {
        return Err(Error::IndexOutOfRange {
            index: i0,
            lo: 0,
            hi: n,
        });
    }
    if fine.is_periodic() && n <= k {
        return Err(Error::Unsupported(format!(
            "periodic coarsening needs n > k, got n = {n}"
        )));
    }
    let coarse = fine.with_removed(i0)?;
    let t = |i: isize| fine.tau(i);
    let two_term = |l: isize| {
        let a = (t(i0) - t(l)) / (t(l + k) - t(l));
        let b = (t(l + k + 1) - t(i0)) / (t(l + k + 1) - t(l + 1));
        vec![(fine.wrap(l), a), (fine.wrap(l + 1), b)]
    };
    let rows = (0..coarse.dim())
        .map(|c| {
            let l = match fine.kind() {
                PartitionKind::Clamped => coarse.index_of(c),
                PartitionKind::Periodic => i0 - k + (c as isize - (i0 - k)).rem_euclid(n - 1),
            };
            if l < i0 - k {
                vec![(fine.wrap(l), 1.0)]
            } else if l < i0 {
                two_term(l)
            } else {
                vec![(fine.wrap(l + 1), 1.0)]
            }
        })
        .collect();
    Ok(BoehmMap { coarse, i0, rows })
}

/// Coefficients on `fine` of the spline with coefficients `c` on `coarse`.
/// Every knot of `coarse` must also be a knot of `fine`, with at least the
/// same multiplicity. Each fine coefficient is the blossom of the coarse
/// piece under a nonempty fine interval of its support, evaluated at the
/// interior knots of that support.
pub fn refine_to(coarse: &Partition, fine: &Partition, c: &[f64]) -> Result<Vec<f64>> {
    if coarse.kind() != fine.kind() || coarse.k() != fine.k() || coarse.n() > fine.n() {
        return Err(Error::PartitionMismatch);
    }
    let k = fine.k() as isize;
    let nf = fine.n() as isize;
    let mut out = vec![0.0; fine.dim()];
    for i in fine.indices() {
        let l = (i..i + k)
            .find(|&l| fine.tau(l + 1) > fine.tau(l))
            .ok_or_else(|| Error::Degenerate(format!("empty support at fine index {i}")))?;
        let mu = match fine.kind() {
            PartitionKind::Clamped => {
                coarse.interior().partition_point(|&t| t <= fine.tau(l)) as isize - 1
            }
            PartitionKind::Periodic => {
                let y = fine.knots()[l.rem_euclid(nf) as usize];
                let m = l.div_euclid(nf);
                coarse.knots().partition_point(|&t| t <= y) as isize - 1 + m * coarse.n() as isize
            }
        };
        let mut args = [0.0; 16];
        for r in 1..k {
            args[r as usize - 1] = fine.tau(i + r);
        }
        out[fine.storage(i)] = blossom(coarse, c, mu, &args[..k as usize - 1]);
    }
    Ok(out)
}

// de Boor's algorithm with a different abscissa on each level
fn blossom(p: &Partition, c: &[f64], mu: isize, args: &[f64]) -> f64 {
    let k = p.k();
    let first = mu - k as isize + 1;
    let mut d = [0.0; 16];
    for (r, v) in d.iter_mut().take(k).enumerate() {
        *v = c[p.storage(first + r as isize)];
    }
    for r in 1..k {
        let x = args[r - 1];
        for j in (r..k).rev() {
            let g = first + j as isize;
            let (tl, tr) = (p.tau(g), p.tau(g + (k - r) as isize));
            let a = (x - tl) / (tr - tl);
            d[j] = a * d[j] + (1.0 - a) * d[j - 1];
        }
    }
    d[k - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(k: usize, pts: &[f64]) -> SplineBasis {
        SplineBasis::new(Partition::clamped(k, pts).unwrap())
    }

    #[test]
    fn indicator_and_hats() {
        let b = basis(1, &[]);
        assert_eq!(b.eval_basis(-1, 0.5).unwrap(), 1.0);
        let b = basis(2, &[0.5]);
        assert_eq!(b.eval_basis(-2, 0.25).unwrap(), 0.5);
        assert_eq!(b.eval_basis(-1, 0.5).unwrap(), 1.0);
        assert_eq!(b.eval_basis(0, 1.0).unwrap(), 1.0);
        assert!(b.eval_basis(1, 0.5).is_err());
    }

    #[test]
    fn periodic_partition_of_unity() {
        let b = SplineBasis::new(Partition::periodic(3, &[0.1, 0.35, 0.4, 0.8]).unwrap());
        for i in 0..=200 {
            let x = i as f64 / 200.0;
            let s: f64 = b.eval_all(x).unwrap().iter().sum();
            assert!((s - 1.0).abs() < 1e-14, "x={x} s={s}");
        }
    }

    #[test]
    fn hat_inner_product() {
        let b = Arc::new(basis(2, &[0.5]));
        let e = |i: usize| {
            let mut c = vec![0.0; 3];
            c[i] = 1.0;
            Spline::primal(b.clone(), c).unwrap()
        };
        let v = inner_product(&e(1), &e(1)).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn norms_of_simple_functions() {
        let b = Arc::new(basis(1, &[]));
        let f = Spline::primal(b, vec![1.0]).unwrap();
        assert!((lp_norm(&f, 2.0, None).unwrap() - 1.0).abs() < 1e-15);
        let b = Arc::new(basis(2, &[0.5]));
        let hat = Spline::primal(b, vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(lp_norm(&hat, f64::INFINITY, None).unwrap(), 1.0);
        assert!(lp_norm(&hat, 0.5, None).is_err());
    }

    #[test]
    fn boehm_two_hat_example() {
        let fine = Partition::clamped(2, &[0.5]).unwrap();
        let map = boehm_coarsen(&fine, 0).unwrap();
        assert_eq!(map.rows.len(), 2);
        assert_eq!(map.rows[0], vec![(-2, 1.0), (-1, 0.5)]);
        assert_eq!(map.rows[1], vec![(-1, 0.5), (0, 1.0)]);
    }
}
