//! Orthonormal spline functions and systems.
//!
//! Inserting `tau_{i0}` into a partition adds one dimension; the new
//! direction is `g = sum_{j=i0-k}^{i0} alpha_j N_j*` with explicit
//! `alpha_j`, normalized to `f = g / ‖g‖_2`.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::bspline::{boehm_coarsen, refine_to, BoehmMap, SplineBasis};
use crate::charint::{characteristic_interval, CharInterval};
use crate::error::{Error, Result};
use crate::gram::{build_gram, GramSystem};
use crate::knots::{maximal_splitting, Domain, KnotSequence, Partition, PartitionKind};
use crate::quadrature;

fn check_alpha(p: &Partition, i0: isize, relaxed: bool) -> Result<()> {
    let n = p.n() as isize;
    let k = p.k() as isize;
    if !(0..n).contains(&i0) {
        return Err(Error::IndexOutOfRange {
            index: i0,
            lo: 0,
            hi: n,
        });
    }
    if p.is_periodic() {
        let need = if relaxed { k + 1 } else { 2 * k };
        if n < need {
            return Err(Error::Unsupported(format!(
                "periodic coefficients need n >= {need}, got n = {n}"
            )));
        }
    }
    Ok(())
}

fn closed_form(p: &Partition, i0: isize) -> Vec<f64> {
    let k = p.k() as isize;
    let t = |i: isize| p.tau(i);
    (0..=k)
        .map(|r| {
            let j = i0 - k + r;
            let mut v = if r % 2 == 0 { 1.0 } else { -1.0 };
            for l in i0 - k + 1..j {
                v *= (t(i0) - t(l)) / (t(l + k) - t(l));
            }
            for l in j + 1..i0 {
                v *= (t(l + k) - t(i0)) / (t(l + k) - t(l));
            }
            v
        })
        .collect()
}

/// `alpha_j`, `j = i0-k ..= i0`, from the product formula. Periodic
/// partitions need `n >= 2k`.
pub fn alpha_closed_form(p: &Partition, i0: isize) -> Result<Vec<f64>> {
    check_alpha(p, i0, false)?;
    Ok(closed_form(p, i0))
}

/// Same coefficients from the two-term recursion, started at
/// `alpha_{i0-k} = prod_{l=i0-k+1}^{i0-1} (tau_{l+k}-tau_{i0})/(tau_{l+k}-tau_l)`.
pub fn alpha_recursion(p: &Partition, i0: isize) -> Result<Vec<f64>> {
    check_alpha(p, i0, false)?;
    let k = p.k() as isize;
    let t = |i: isize| p.tau(i);
    let mut out = Vec::with_capacity(k as usize + 1);
    let mut a: f64 = (i0 - k + 1..i0)
        .map(|l| (t(l + k) - t(i0)) / (t(l + k) - t(l)))
        .product();
    out.push(a);
    for i in i0 - k..i0 {
        let den = t(i + k + 1) - t(i0);
        if den <= 0.0 {
            return Err(Error::Degenerate(format!(
                "zero recursion denominator at {i}"
            )));
        }
        a = -a * ((t(i0) - t(i)) / (t(i + k) - t(i))) * ((t(i + k + 1) - t(i + 1)) / den);
        out.push(a);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthoFunction {
    /// Number of points in the sequence once this function's knot is in.
    pub index_n: usize,
    pub i0: isize,
    pub kind: PartitionKind,
    /// `alpha_j` for `j = i0-k ..= i0`.
    pub alpha: Vec<f64>,
    /// Primal coefficients of `g` on its own partition, storage order.
    pub w: Vec<f64>,
    pub norm2: f64,
    /// Absent for periodic steps with `n < 2k`.
    pub j: Option<CharInterval>,
}

impl OrthoFunction {
    /// Primal coefficients of `f = g / ‖g‖_2`.
    pub fn normalized(&self) -> Vec<f64> {
        self.w.iter().map(|v| v / self.norm2).collect()
    }
}

/// Builds `g` for the partition carried by `gram`. With `relaxed`, periodic
/// partitions with `k < n < 2k` are accepted (no characteristic interval).
pub fn build_g_in(gram: &GramSystem, i0: isize, relaxed: bool) -> Result<OrthoFunction> {
    let p = gram.basis().partition();
    check_alpha(p, i0, relaxed)?;
    let k = p.k() as isize;
    let alpha = closed_form(p, i0);
    let mut b = vec![0.0; p.dim()];
    for (r, a) in alpha.iter().enumerate() {
        b[p.storage(i0 - k + r as isize)] += a;
    }
    let w = gram.solve(&b);
    let norm2 = b.iter().zip(&w).map(|(x, y)| x * y).sum::<f64>().sqrt();
    let j = if !p.is_periodic() || p.n() >= 2 * p.k() {
        Some(characteristic_interval(p, i0, &alpha)?)
    } else {
        None
    };
    Ok(OrthoFunction {
        index_n: p.n(),
        i0,
        kind: p.kind(),
        alpha,
        w,
        norm2,
        j,
    })
}

pub fn build_g(p: &Partition, i0: isize) -> Result<(OrthoFunction, GramSystem)> {
    if p.is_periodic() {
        return Err(Error::Unsupported(
            "build_g expects a clamped partition".into(),
        ));
    }
    let gram = build_gram(Arc::new(SplineBasis::new(p.clone())))?;
    Ok((build_g_in(&gram, i0, false)?, gram))
}

pub fn build_g_periodic(p: &Partition, i0: isize) -> Result<(OrthoFunction, GramSystem)> {
    if !p.is_periodic() {
        return Err(Error::Unsupported(
            "build_g_periodic expects a periodic partition".into(),
        ));
    }
    check_alpha(p, i0, false)?;
    let gram = build_gram(Arc::new(SplineBasis::new(p.clone())))?;
    Ok((build_g_in(&gram, i0, false)?, gram))
}

/// An orthonormal spline system over a knot sequence. All functions are
/// kept as primal coefficients in the basis of the full sequence.
#[derive(Debug, Clone)]
pub struct OrthoSystem {
    pub sequence: KnotSequence,
    pub basis: Arc<SplineBasis>,
    /// Size of the initial orthonormalized block.
    pub initial_len: usize,
    /// System order: initial block first, then one function per point.
    pub coeffs: Vec<Vec<f64>>,
    /// Per-step data; empty for oracle-built systems.
    pub functions: Vec<OrthoFunction>,
}

/// Points used for the initial block: none on the interval (polynomials),
/// the first `k` on the torus.
pub fn initial_count(seq: &KnotSequence) -> usize {
    match seq.domain() {
        Domain::Interval => 0,
        Domain::Torus => seq.k().min(seq.len()),
    }
}

fn lowdin(gram: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(gram.clone());
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose()
}

pub fn build_system(seq: &KnotSequence) -> Result<OrthoSystem> {
    let init = initial_count(seq);
    if seq.domain() == Domain::Torus && init == 0 {
        return Err(Error::Degenerate("torus sequence without points".into()));
    }
    let pts = seq.points();
    let mut p = seq.prefix(init).partition()?;
    let gram0 = build_gram(Arc::new(SplineBasis::new(p.clone())))?;
    let c0 = lowdin(&gram0.dense());
    // each function stays on its own partition until the final refinement
    let mut staged: Vec<(Partition, Vec<f64>)> = (0..c0.ncols())
        .map(|j| (p.clone(), c0.column(j).iter().copied().collect()))
        .collect();
    let initial_len = staged.len();
    let mut functions = Vec::with_capacity(pts.len() - init);
    for &x in &pts[init..] {
        let (fine, i0) = p.with_inserted(x)?;
        let gram = build_gram(Arc::new(SplineBasis::new(fine.clone())))?;
        let f = build_g_in(&gram, i0, true)?;
        staged.push((fine.clone(), f.normalized()));
        functions.push(f);
        p = fine;
    }
    let coeffs = staged
        .par_iter()
        .map(|(q, c)| {
            if q.n() == p.n() {
                Ok(c.clone())
            } else {
                refine_to(q, &p, c)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OrthoSystem {
        sequence: seq.clone(),
        basis: Arc::new(SplineBasis::new(p)),
        initial_len,
        coeffs,
        functions,
    })
}

impl OrthoSystem {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn k(&self) -> usize {
        self.sequence.k()
    }

    pub fn eval(&self, idx: usize, x: f64) -> f64 {
        self.basis.eval_coeffs(&self.coeffs[idx], x)
    }

    /// Partition after the first `points` knots of the sequence.
    pub fn step_partition(&self, points: usize) -> Result<Partition> {
        self.sequence.prefix(points).partition()
    }

    /// System position of an insertion step.
    pub fn position_of_step(&self, step: usize) -> usize {
        self.initial_len + step
    }

    /// Number of leading sequence points whose spline space contains the
    /// function at system position `pos`.
    pub fn prefix_len(&self, pos: usize) -> usize {
        let init = initial_count(&self.sequence);
        if pos < self.initial_len {
            init
        } else {
            init + pos - self.initial_len + 1
        }
    }

    /// Characteristic interval of the function at `pos`, when it has one.
    pub fn char_interval(&self, pos: usize) -> Option<&CharInterval> {
        pos.checked_sub(self.initial_len)
            .and_then(|s| self.functions.get(s))
            .and_then(|f| f.j.as_ref())
    }

    /// `max |⟨f_n, f_m⟩ - δ_nm|`, with exact spline inner products.
    pub fn orthonormality_error(&self) -> Result<f64> {
        let gram = build_gram(self.basis.clone())?;
        Ok(gram_error(&gram, &self.coeffs))
    }

    /// Line export, one function per line in system order:
    /// `n i0 norm2 J_a J_b alpha_count alpha... w_count w...`. Initial
    /// block rows carry `i0 = -` and `nan` for the step fields; `w` is the
    /// normalized coefficient vector in the final basis.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# n i0 norm2 J_a J_b alpha_count alpha... w_count w...\n");
        let fmt = |v: f64| format!("{v:.16e}");
        for (pos, c) in self.coeffs.iter().enumerate() {
            let step = pos
                .checked_sub(self.initial_len)
                .and_then(|s| self.functions.get(s));
            let mut line = match step {
                Some(f) => {
                    let (ja, jb) =
                        f.j.as_ref()
                            .map_or((f64::NAN, f64::NAN), |j| (j.j.a, j.j.e));
                    let mut l = format!(
                        "{} {} {} {} {} {}",
                        f.index_n,
                        f.i0,
                        fmt(f.norm2),
                        fmt(ja),
                        fmt(jb),
                        f.alpha.len()
                    );
                    for a in &f.alpha {
                        let _ = write!(l, " {}", fmt(*a));
                    }
                    l
                }
                None => format!("{pos} - nan nan nan 0"),
            };
            let _ = write!(line, " {}", c.len());
            for v in c {
                let _ = write!(line, " {}", fmt(*v));
            }
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

/// `max |c_i^T G c_j - δ_ij|` over all pairs.
pub fn gram_error(gram: &GramSystem, coeffs: &[Vec<f64>]) -> f64 {
    let gc: Vec<Vec<f64>> = coeffs.par_iter().map(|c| gram.matvec(c)).collect();
    (0..coeffs.len())
        .into_par_iter()
        .map(|i| {
            let mut worst: f64 = 0.0;
            for (j, g) in gc.iter().enumerate().skip(i) {
                let v: f64 = coeffs[i].iter().zip(g).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - want).abs());
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

/// Tolerance for the oracle's own orthonormality.
pub const ORACLE_TOL: f64 = 1e-8;

// Nested partitions of a sequence with the Böhm map of every insertion;
// lifts prefix coefficients to the final basis.
struct Chain {
    parts: Vec<Partition>,
    maps: Vec<BoehmMap>,
}

impl Chain {
    fn new(seq: &KnotSequence, init: usize) -> Result<Self> {
        let mut parts = vec![seq.prefix(init).partition()?];
        let mut maps = Vec::new();
        for &x in &seq.points()[init..] {
            let (fine, i0) = parts.last().unwrap().with_inserted(x)?;
            let map = boehm_coarsen(&fine, i0)?;
            if &map.coarse != parts.last().unwrap() {
                return Err(Error::PartitionMismatch);
            }
            maps.push(map);
            parts.push(fine);
        }
        Ok(Chain { parts, maps })
    }

    // `N_i` of partition `level`, in the final basis
    fn lift(&self, level: usize, i: isize) -> DVector<f64> {
        let p = &self.parts[level];
        let mut v = vec![0.0; p.dim()];
        v[p.storage(i)] = 1.0;
        for (m, map) in self.maps.iter().enumerate().skip(level) {
            v = map.refine(&self.parts[m + 1], &v);
        }
        DVector::from_vec(v)
    }
}

/// Orthonormal system by modified Gram-Schmidt with reorthogonalization on
/// the nested B-spline bases, independent of the explicit coefficient
/// formulas. Coarse B-splines enter the final basis through Böhm's knot
/// insertion. Meant for small sequences (a few hundred points).
pub fn gram_schmidt_oracle(seq: &KnotSequence) -> Result<OrthoSystem> {
    let init = initial_count(seq);
    let chain = Chain::new(seq, init)?;
    let target = Arc::new(SplineBasis::new(chain.parts.last().unwrap().clone()));
    let gram = build_gram(target.clone())?;
    let g = gram.dense();
    let e: Vec<DVector<f64>> = chain.parts[0].indices().map(|i| chain.lift(0, i)).collect();
    let e = DMatrix::from_columns(&e);
    let g0 = e.transpose() * &g * &e;
    let q0 = &e * lowdin(&g0);
    let mut q: Vec<DVector<f64>> = (0..q0.ncols()).map(|j| q0.column(j).into_owned()).collect();
    let mut gq: Vec<DVector<f64>> = q.iter().map(|v| &g * v).collect();
    let initial_len = q.len();
    let k = seq.k() as isize;
    for (step, map) in chain.maps.iter().enumerate() {
        let fine = &chain.parts[step + 1];
        let i0 = map.i0;
        let mut cands: Vec<isize> = (i0 - k..=i0).map(|j| fine.wrap(j)).collect();
        cands.dedup();
        let mut best: Option<(f64, DVector<f64>)> = None;
        for j in cands {
            let v0 = chain.lift(step + 1, j);
            let n0 = v0.dot(&(&g * &v0)).sqrt();
            let mut v = v0;
            for _ in 0..2 {
                let mut gv = &g * &v;
                for (qi, gqi) in q.iter().zip(&gq) {
                    let c = qi.dot(&gv);
                    v.axpy(-c, qi, 1.0);
                    gv.axpy(-c, gqi, 1.0);
                }
            }
            let r = v.dot(&(&g * &v)).sqrt() / n0;
            if best.as_ref().is_none_or(|(b, _)| r > *b) {
                best = Some((r, v));
            }
        }
        let (_, v) = best.ok_or_else(|| Error::Degenerate("no candidate".into()))?;
        let nv = v.dot(&(&g * &v)).sqrt();
        let v = v / nv;
        gq.push(&g * &v);
        q.push(v);
    }
    let coeffs: Vec<Vec<f64>> = q.iter().map(|v| v.iter().copied().collect()).collect();
    let loss = gram_error(&gram, &coeffs);
    if loss > ORACLE_TOL {
        return Err(Error::OrthogonalityLoss(loss));
    }
    Ok(OrthoSystem {
        sequence: seq.clone(),
        basis: target,
        initial_len,
        coeffs,
        functions: Vec::new(),
    })
}

/// Largest coefficient deviation between two systems after aligning the
/// sign of each function pair.
pub fn max_deviation_up_to_sign(a: &OrthoSystem, b: &OrthoSystem) -> Result<f64> {
    if a.len() != b.len() || a.basis.partition() != b.basis.partition() {
        return Err(Error::PartitionMismatch);
    }
    Ok(a.coeffs
        .iter()
        .zip(&b.coeffs)
        .map(|(x, y)| {
            let dot: f64 = x.iter().zip(y).map(|(u, v)| u * v).sum();
            let s = if dot < 0.0 { -1.0 } else { 1.0 };
            x.iter()
                .zip(y)
                .map(|(u, v)| (u - s * v).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// `alpha_j / alpha^_j` on the first usable index outside B.
    pub c: f64,
    /// `max |ratio_j / c - 1|` over usable indices outside B.
    pub c_spread: f64,
    /// `|J| / |Ĵ|`.
    pub ratio_j: f64,
    /// `beta_j` for `j ∈ B`.
    pub beta: Vec<(isize, f64)>,
    /// `max_{j ∉ B} |beta_j|`.
    pub max_off_b_residual: f64,
    pub norm_g: f64,
    pub norm_ghat: f64,
    /// Insertion index after the rotation of the maximal splitting.
    pub i0: isize,
}

impl ComparisonReport {
    pub fn max_beta(&self) -> f64 {
        self.beta.iter().map(|b| b.1.abs()).fold(0.0, f64::max)
    }
}

/// Compares the periodic function of inserting `sigma_{i0}` with the
/// clamped one on the maximal splitting of the same partition.
pub fn compare_periodic_nonperiodic(p: &Partition, i0: isize) -> Result<ComparisonReport> {
    let k = p.k() as isize;
    let n = p.n() as isize;
    if !p.is_periodic() {
        return Err(Error::Unsupported(
            "comparison needs a periodic partition".into(),
        ));
    }
    if n < 2 * k + 2 {
        return Err(Error::Unsupported(format!(
            "comparison needs n >= 2k+2, got {n}"
        )));
    }
    let ms = maximal_splitting(p)?;
    let i = ms.map_index(i0);
    let (g, gram) = build_g(&ms.clamped, i)?;
    let (gh, gram_h) = build_g_periodic(&ms.periodic, i)?;
    let in_b = |j: isize| j < 0 || j >= n - k;
    let mut ratios = Vec::new();
    for r in 0..=k {
        let j = i - k + r;
        let (a, ah) = (g.alpha[r as usize], gh.alpha[r as usize]);
        if !in_b(j) && ah != 0.0 {
            ratios.push(a / ah);
        }
    }
    let c = *ratios
        .first()
        .ok_or_else(|| Error::Degenerate("no usable index outside B".into()))?;
    let c_spread = ratios
        .iter()
        .map(|r| (r / c - 1.0).abs())
        .fold(0.0, f64::max);

    // ⟨ĝ, N_j⟩ on the clamped basis; both bases share the same cells
    let cb = gram.basis();
    let hb = gram_h.basis();
    let mut moments = vec![0.0; cb.dim()];
    let mut buf = [0.0; 16];
    for (ci, cell) in cb.cells().iter().enumerate() {
        let slots: Vec<usize> = cb.cell_slots(ci).collect();
        quadrature::for_each_node(cell.a, cell.b, k as usize, |x, w| {
            let v = hb.eval_coeffs(&gh.w, x);
            cb.eval_span(cell.span, x + cell.shift, &mut buf);
            for (r, &s) in slots.iter().enumerate() {
                moments[s] += w * v * buf[r];
            }
        });
    }
    let pc = &ms.clamped;
    let mut alpha_full = vec![0.0; cb.dim()];
    for (r, a) in g.alpha.iter().enumerate() {
        alpha_full[pc.storage(i - k + r as isize)] = *a;
    }
    let mut beta = Vec::new();
    let mut off = 0.0f64;
    for j in pc.indices() {
        let s = pc.storage(j);
        let bj = alpha_full[s] - c * moments[s];
        if in_b(j) {
            beta.push((j, bj));
        } else {
            off = off.max(bj.abs());
        }
    }
    let ratio_j = match (&g.j, &gh.j) {
        (Some(a), Some(b)) => a.len() / b.len(),
        _ => f64::NAN,
    };
    Ok(ComparisonReport {
        c,
        c_spread,
        ratio_j,
        beta,
        max_off_b_residual: off,
        norm_g: g.norm2,
        norm_ghat: gh.norm2,
        i0: i,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_one_alpha() {
        let p = Partition::clamped(1, &[0.3]).unwrap();
        assert_eq!(alpha_closed_form(&p, 0).unwrap(), vec![1.0, -1.0]);
        assert_eq!(alpha_recursion(&p, 0).unwrap(), vec![1.0, -1.0]);
    }

    #[test]
    fn haar_function() {
        let p = Partition::clamped(1, &[0.3]).unwrap();
        let (g, _) = build_g(&p, 0).unwrap();
        assert!((g.w[0] - 1.0 / 0.3).abs() < 1e-12);
        assert!((g.w[1] + 1.0 / 0.7).abs() < 1e-12);
        // ⟨g, 1⟩ = 0.3 w_0 + 0.7 w_1
        assert!((0.3 * g.w[0] + 0.7 * g.w[1]).abs() < 1e-12);
    }

    #[test]
    fn periodic_needs_two_k() {
        let p = Partition::periodic(3, &[0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        assert!(alpha_closed_form(&p, 0).is_err());
        assert!(build_g_periodic(&p, 0).is_err());
    }

    #[test]
    fn initial_block_only() {
        let seq = KnotSequence::new(Domain::Interval, 3).unwrap();
        let sys = build_system(&seq).unwrap();
        assert_eq!(sys.len(), 3);
        assert!(sys.orthonormality_error().unwrap() < 1e-13);
    }
}
