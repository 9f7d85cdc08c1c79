//! Gram matrices of B-spline bases, their factorization and inverse.
//!
//! Clamped Gram matrices are banded with half-bandwidth `k-1` and use a band
//! Cholesky factor. Periodic ones add wrap-around corners; for `n >= 4k`
//! the last `k-1` indices are treated as a border and eliminated through a
//! dense Schur complement, smaller systems fall back to dense Cholesky.

use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use crate::bspline::{Repr, Spline, SplineBasis};
use crate::error::{Error, Result};
use crate::fit::{envelope_fit, DecayFit};
use crate::knots::cyclic_distance;
use crate::quadrature::{self, AdaptiveOptions};

/// Symmetric band matrix, lower half: `data[i*w + d] = A[i][i-d]`.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    w: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, w: usize) -> Self {
        Self {
            n,
            w,
            data: vec![0.0; n * w],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let d = i - j;
        if d < self.w {
            self.data[i * self.w + d]
        } else {
            0.0
        }
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        self.data[i * self.w + (i - j)] += v;
    }
}

/// Lower band Cholesky factor `A = L L^T`, same layout as [`BandMatrix`].
#[derive(Debug, Clone)]
pub struct BandCholesky {
    l: BandMatrix,
}

impl BandCholesky {
    pub fn factor(a: &BandMatrix) -> Result<Self> {
        let (n, w) = (a.n, a.w);
        let mut l = BandMatrix::zeros(n, w);
        for i in 0..n {
            let lo = i.saturating_sub(w - 1);
            for j in lo..=i {
                let mut s = a.get(i, j);
                for p in lo.max(j.saturating_sub(w - 1))..j {
                    s -= l.data[i * w + (i - p)] * l.data[j * w + (j - p)];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::Factorization(i));
                    }
                    l.data[i * w] = s.sqrt();
                } else {
                    l.data[i * w + (i - j)] = s / l.data[j * w];
                }
            }
        }
        Ok(Self { l })
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (n, w, d) = (self.l.n, self.l.w, &self.l.data);
        for i in 0..n {
            let mut s = x[i];
            for p in i.saturating_sub(w - 1)..i {
                s -= d[i * w + (i - p)] * x[p];
            }
            x[i] = s / d[i * w];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for r in i + 1..(i + w).min(n) {
                s -= d[r * w + (r - i)] * x[r];
            }
            x[i] = s / d[i * w];
        }
    }
}

#[derive(Debug, Clone)]
enum Storage {
    Band(BandMatrix),
    // periodic, n >= 4k: row i holds A[i][(i+d) mod n] for d in -(k-1)..=k-1
    Cyclic { n: usize, k: usize, data: Vec<f64> },
    Dense(DMatrix<f64>),
}

impl Storage {
    fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Storage::Band(b) => b.get(i, j),
            Storage::Cyclic { n, k, data } => {
                let d = (j as isize - i as isize).rem_euclid(*n as isize) as usize;
                let w = 2 * k - 1;
                if d < *k {
                    data[i * w + (k - 1 + d)]
                } else if *n - d < *k {
                    data[i * w + (k - 1) - (*n - d)]
                } else {
                    0.0
                }
            }
            Storage::Dense(m) => m[(i, j)],
        }
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        match self {
            Storage::Band(b) => {
                if i >= j {
                    b.add(i, j, v)
                }
            }
            Storage::Cyclic { n, k, data } => {
                let d = (j as isize - i as isize).rem_euclid(*n as isize) as usize;
                let w = 2 * *k - 1;
                if d < *k {
                    data[i * w + (*k - 1 + d)] += v;
                } else {
                    data[i * w + (*k - 1) - (*n - d)] += v;
                }
            }
            Storage::Dense(m) => m[(i, j)] += v,
        }
    }
}

#[derive(Debug, Clone)]
struct Bordered {
    m: usize,
    a: BandCholesky,
    // C is m x b (border columns), Z = A^{-1} C
    c: DMatrix<f64>,
    z: DMatrix<f64>,
    s: Cholesky<f64, Dyn>,
}

#[derive(Debug, Clone)]
enum Factor {
    Band(BandCholesky),
    Bordered(Box<Bordered>),
    Dense(Cholesky<f64, Dyn>),
}

#[derive(Debug)]
pub struct GramSystem {
    basis: Arc<SplineBasis>,
    storage: Storage,
    factor: Factor,
    columns: Vec<OnceLock<Vec<f64>>>,
}

impl GramSystem {
    pub fn new(basis: Arc<SplineBasis>) -> Result<Self> {
        build_gram(basis)
    }

    pub fn basis(&self) -> &Arc<SplineBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// `⟨N_i, N_j⟩` by storage slot.
    pub fn entry_slot(&self, i: usize, j: usize) -> f64 {
        self.storage.get(i, j)
    }

    /// `⟨N_i, N_j⟩` by basis index.
    pub fn entry(&self, i: isize, j: isize) -> f64 {
        let p = self.basis.partition();
        self.storage.get(p.storage(i), p.storage(j))
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.storage.get(i, j))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let k = self.basis.k();
        let p = self.basis.partition();
        let mut y = vec![0.0; n];
        for (i, yi) in y.iter_mut().enumerate() {
            let ii = p.index_of(i);
            let mut seen = Vec::with_capacity(2 * k);
            for d in -(k as isize - 1)..=(k as isize - 1) {
                let jj = ii + d;
                if !p.is_periodic() && !p.indices().contains(&jj) {
                    continue;
                }
                let j = p.storage(jj);
                if !seen.contains(&j) {
                    seen.push(j);
                    *yi += self.storage.get(i, j) * x[j];
                }
            }
        }
        y
    }

    /// Solves `G x = b` for storage-ordered `b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        match &self.factor {
            Factor::Band(ch) => {
                let mut x = b.to_vec();
                ch.solve_in_place(&mut x);
                x
            }
            Factor::Dense(ch) => ch.solve(&DVector::from_column_slice(b)).as_slice().to_vec(),
            Factor::Bordered(f) => {
                let m = f.m;
                let mut y = b[..m].to_vec();
                f.a.solve_in_place(&mut y);
                let yv = DVector::from_column_slice(&y);
                let r = DVector::from_column_slice(&b[m..]) - f.c.transpose() * &yv;
                let xb = f.s.solve(&r);
                let xa = yv - &f.z * &xb;
                let mut x = xa.as_slice().to_vec();
                x.extend_from_slice(xb.as_slice());
                x
            }
        }
    }

    /// Column `j` (storage slot) of `G^{-1}`, computed once and cached.
    pub fn inverse_column_slot(&self, j: usize) -> &[f64] {
        self.columns[j].get_or_init(|| {
            let mut e = vec![0.0; self.dim()];
            e[j] = 1.0;
            self.solve(&e)
        })
    }

    pub fn inverse_column(&self, j: isize) -> &[f64] {
        self.inverse_column_slot(self.basis.partition().storage(j))
    }

    /// `a_ij = (G^{-1})_ij`, by basis index.
    pub fn inverse_entry(&self, i: isize, j: isize) -> f64 {
        let p = self.basis.partition();
        self.inverse_column_slot(p.storage(j))[p.storage(i)]
    }

    /// Fills every inverse column, in parallel.
    pub fn fill_inverse(&self) {
        (0..self.dim()).into_par_iter().for_each(|j| {
            self.inverse_column_slot(j);
        });
    }

    pub fn dual_to_primal(&self, f: &Spline) -> Result<Spline> {
        self.check_basis(f)?;
        match f.repr {
            Repr::Primal => Ok(f.clone()),
            Repr::Dual => Spline::new(self.basis.clone(), Repr::Primal, self.solve(&f.coeffs)),
        }
    }

    pub fn primal_to_dual(&self, f: &Spline) -> Result<Spline> {
        self.check_basis(f)?;
        match f.repr {
            Repr::Dual => Ok(f.clone()),
            Repr::Primal => Spline::new(self.basis.clone(), Repr::Dual, self.matvec(&f.coeffs)),
        }
    }

    fn check_basis(&self, f: &Spline) -> Result<()> {
        if Arc::ptr_eq(&f.basis, &self.basis) || f.basis.partition() == self.basis.partition() {
            Ok(())
        } else {
            Err(Error::PartitionMismatch)
        }
    }

    /// Moments `⟨h, N_j⟩` by adaptive quadrature on every cell, split
    /// further at `breaks` (discontinuities of h).
    pub fn moments<H: Fn(f64) -> f64 + Sync>(&self, h: &H, breaks: &[f64]) -> Result<Vec<f64>> {
        let basis = &self.basis;
        let k = basis.k();
        let mut pieces = Vec::new();
        for (ci, c) in basis.cells().iter().enumerate() {
            let mut cuts = vec![c.a];
            let mut inner: Vec<f64> = breaks
                .iter()
                .copied()
                .filter(|&x| x > c.a && x < c.b)
                .collect();
            inner.sort_by(f64::total_cmp);
            cuts.extend(inner);
            cuts.push(c.b);
            for w in cuts.windows(2) {
                pieces.push((ci, w[0], w[1]));
            }
        }
        let scale: f64 = pieces
            .iter()
            .map(|&(_, a, b)| quadrature::integrate(|x| h(x).abs(), a, b, 16))
            .sum::<f64>()
            .max(f64::MIN_POSITIVE);
        let opts = AdaptiveOptions {
            tol: (1e-13 * scale).max(1e-290),
            max_depth: 30,
        };
        let parts: Vec<Result<(usize, Vec<f64>)>> = pieces
            .par_iter()
            .map(|&(ci, a, b)| {
                let cell = basis.cells()[ci];
                let mut acc = vec![0.0; k];
                let f = |x: f64, out: &mut [f64]| {
                    basis.eval_span(cell.span, x + cell.shift, out);
                    let hv = h(x);
                    out.iter_mut().for_each(|v| *v *= hv);
                };
                quadrature::adaptive_vec(&f, k, a, b, opts, &mut acc)?;
                Ok((ci, acc))
            })
            .collect();
        let mut b = vec![0.0; self.dim()];
        for part in parts {
            let (ci, acc) = part?;
            for (r, slot) in basis.cell_slots(ci).enumerate() {
                b[slot] += acc[r];
            }
        }
        Ok(b)
    }

    /// Orthogonal projection `P h = sum_j ⟨h, N_j⟩ N_j*`, in primal form.
    pub fn project<H: Fn(f64) -> f64 + Sync>(&self, h: &H, breaks: &[f64]) -> Result<Spline> {
        let b = self.moments(h, breaks)?;
        Spline::primal(self.basis.clone(), self.solve(&b))
    }

    /// Grid lower bound for `sup_x ∫ |K(x,y)| dy` with the projection kernel
    /// `K(x,y) = sum a_ij N_i(x) N_j(y)`, using `samples` points per cell.
    /// The inner integral is exact: each cell is split at the zeros of the
    /// kernel section.
    pub fn projection_infinity_norm(&self, samples: usize) -> f64 {
        let basis = &self.basis;
        let k = basis.k();
        self.fill_inverse();
        let n = self.dim();
        let ncell = basis.cells().len();
        (0..ncell)
            .into_par_iter()
            .map(|ci| {
                let cell = basis.cells()[ci];
                let mut buf = [0.0; 16];
                let mut coeffs = vec![0.0; n];
                let mut best: f64 = 0.0;
                let count = if ci + 1 == ncell {
                    samples + 1
                } else {
                    samples
                };
                for s in 0..count {
                    let x = cell.a + cell.len() * s as f64 / samples as f64;
                    basis.eval_span(cell.span, x + cell.shift, &mut buf);
                    coeffs.iter_mut().for_each(|c| *c = 0.0);
                    for (r, slot) in basis.cell_slots(ci).enumerate() {
                        let col = self.inverse_column_slot(slot);
                        for (c, v) in coeffs.iter_mut().zip(col) {
                            *c += buf[r] * v;
                        }
                    }
                    best = best.max(l1_norm_exact(basis, &coeffs, k));
                }
                best
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Envelope fit of `|a_ij| D_ij` against the index distance, with
    /// `D_ij = |conv(supp N_i ∪ supp N_j)|` (clamped) or
    /// `max(|supp N_i|, |supp N_j|)` and cyclic distance (periodic).
    /// Entries below `1e-14 max|a|` are dropped.
    pub fn fit_decay(&self) -> DecayFit {
        let samples = self.decay_samples();
        envelope_fit(&samples).unwrap_or(DecayFit {
            c: 0.0,
            q: 0.0,
            residual: 0.0,
            distances: 0,
        })
    }

    /// `(distance, |a_ij| D_ij)` for all retained pairs `i <= j`.
    pub fn decay_samples(&self) -> Vec<(usize, f64)> {
        self.fill_inverse();
        let p = self.basis.partition();
        let n = self.dim();
        let k = p.k() as isize;
        let max_a = (0..n)
            .flat_map(|j| self.inverse_column_slot(j).iter().map(|v| v.abs()))
            .fold(0.0, f64::max);
        let floor = 1e-14 * max_a;
        let mut out = Vec::new();
        for j in 0..n {
            let col = self.inverse_column_slot(j);
            let jj = p.index_of(j);
            for (i, &a) in col.iter().enumerate().take(j + 1) {
                if a.abs() <= floor {
                    continue;
                }
                let ii = p.index_of(i);
                let (d, den) = if p.is_periodic() {
                    (cyclic_distance(n, ii, jj), p.nu(ii).max(p.nu(jj)))
                } else {
                    let lo = p.tau(ii).min(p.tau(jj));
                    let hi = p.tau(ii + k).max(p.tau(jj + k));
                    ((jj - ii).unsigned_abs(), hi - lo)
                };
                out.push((d, a.abs() * den));
            }
        }
        out
    }

    /// Row-major dense export, whitespace separated, 17 significant digits.
    pub fn to_dense_text(&self) -> String {
        let n = self.dim();
        let mut out = String::new();
        for i in 0..n {
            let row: Vec<String> = (0..n)
                .map(|j| format!("{:.16e}", self.storage.get(i, j)))
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }
}

// ∫_0^1 |s| for a spline given by storage coefficients.
pub(crate) fn l1_norm_exact(basis: &SplineBasis, coeffs: &[f64], k: usize) -> f64 {
    let mut total = 0.0;
    for (ci, cell) in basis.cells().iter().enumerate() {
        let poly = basis.cell_poly(ci, coeffs);
        let mut cuts = vec![0.0];
        cuts.extend(
            poly.roots_in(0.0, 1.0)
                .into_iter()
                .filter(|&r| r > 0.0 && r < 1.0),
        );
        cuts.push(1.0);
        for w in cuts.windows(2) {
            let v = quadrature::integrate(|t| poly.eval(t), w[0], w[1], k.max(1));
            total += v.abs() * cell.len();
        }
    }
    total
}

/// Assembles the Gram matrix cell by cell with k-point Gauss (exact) and
/// factors it.
pub fn build_gram(basis: Arc<SplineBasis>) -> Result<GramSystem> {
    let p = basis.partition();
    let k = p.k();
    let n = p.dim();
    if n == 0 {
        return Err(Error::Degenerate("empty basis".into()));
    }
    let mut storage = if !p.is_periodic() {
        Storage::Band(BandMatrix::zeros(n, k))
    } else if n >= 4 * k {
        Storage::Cyclic {
            n,
            k,
            data: vec![0.0; n * (2 * k - 1)],
        }
    } else {
        Storage::Dense(DMatrix::zeros(n, n))
    };
    let mut buf = [0.0; 16];
    for (ci, cell) in basis.cells().iter().enumerate() {
        let slots: Vec<usize> = basis.cell_slots(ci).collect();
        quadrature::for_each_offset(cell.len(), k, |s, w| {
            basis.eval_span_offset(cell.span, cell.a + cell.shift, s, &mut buf);
            for r in 0..k {
                for s in 0..k {
                    let v = w * buf[r] * buf[s];
                    match storage {
                        Storage::Band(_) if slots[r] < slots[s] => {}
                        _ => storage.add(slots[r], slots[s], v),
                    }
                }
            }
        });
    }
    let factor = match &storage {
        Storage::Band(b) => Factor::Band(BandCholesky::factor(b)?),
        Storage::Dense(m) => {
            Factor::Dense(Cholesky::new(m.clone()).ok_or(Error::Factorization(0))?)
        }
        Storage::Cyclic { .. } => Factor::Bordered(Box::new(bordered(&storage, n, k)?)),
    };
    let columns = (0..n).map(|_| OnceLock::new()).collect();
    Ok(GramSystem {
        basis,
        storage,
        factor,
        columns,
    })
}

fn bordered(storage: &Storage, n: usize, k: usize) -> Result<Bordered> {
    let nb = k - 1;
    let m = n - nb;
    let mut a = BandMatrix::zeros(m, k);
    for i in 0..m {
        for j in i.saturating_sub(k - 1)..=i {
            a.add(i, j, storage.get(i, j));
        }
    }
    let ach = BandCholesky::factor(&a)?;
    let c = DMatrix::from_fn(m, nb, |i, q| storage.get(i, m + q));
    let d = DMatrix::from_fn(nb, nb, |q, r| storage.get(m + q, m + r));
    let mut z = c.clone();
    for q in 0..nb {
        let mut col: Vec<f64> = z.column(q).iter().copied().collect();
        ach.solve_in_place(&mut col);
        z.column_mut(q).copy_from_slice(&col);
    }
    let s = d - c.transpose() * &z;
    let s = Cholesky::new(s).ok_or(Error::Factorization(m))?;
    Ok(Bordered { m, a: ach, c, z, s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knots::Partition;

    fn gram(p: Partition) -> GramSystem {
        build_gram(Arc::new(SplineBasis::new(p))).unwrap()
    }

    #[test]
    fn order_one_is_diagonal() {
        let g = gram(Partition::clamped(1, &[0.2, 0.7]).unwrap());
        let nu = [0.2, 0.5, 0.3];
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { nu[i] } else { 0.0 };
                assert!((g.entry_slot(i, j) - want).abs() < 1e-15);
                let inv = if i == j { 1.0 / nu[i] } else { 0.0 };
                assert!((g.inverse_column_slot(j)[i] - inv).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hat_gram_uniform() {
        let g = gram(Partition::clamped(2, &[0.5]).unwrap());
        let want = [
            [1.0 / 6.0, 1.0 / 12.0, 0.0],
            [1.0 / 12.0, 1.0 / 3.0, 1.0 / 12.0],
            [0.0, 1.0 / 12.0, 1.0 / 6.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert!((g.entry_slot(i, j) - want[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn periodic_hat_circulant() {
        let g = gram(Partition::periodic(2, &[0.0, 0.25, 0.5, 0.75]).unwrap());
        for i in 0..4 {
            assert!((g.entry_slot(i, i) - 1.0 / 6.0).abs() < 1e-15);
            assert!((g.entry_slot(i, (i + 1) % 4) - 1.0 / 24.0).abs() < 1e-15);
            assert!((g.entry_slot(i, (i + 3) % 4) - 1.0 / 24.0).abs() < 1e-15);
            assert!(g.entry_slot(i, (i + 2) % 4).abs() < 1e-15);
        }
    }

    #[test]
    fn order_one_projection_norm_is_one() {
        let g = gram(Partition::clamped(1, &[0.3, 0.4, 0.9]).unwrap());
        assert!((g.projection_infinity_norm(16) - 1.0).abs() < 1e-12);
    }
}
