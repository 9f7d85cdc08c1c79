//! Characteristic intervals, grid-point distance counts and the minimal
//! enclosing arcs used for periodic pointwise bounds.

use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::knots::Partition;

/// Closed interval of [0,1] or closed arc of the torus. Endpoints are
/// stored as exact knot values in [0,1] (arcs: `a`, `e` in [0,1) with
/// `wraps` when the arc passes through 0). Membership and inclusion use
/// comparisons only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seg {
    pub a: f64,
    pub e: f64,
    pub wraps: bool,
}

impl Seg {
    pub fn interval(a: f64, e: f64) -> Self {
        Seg { a, e, wraps: false }
    }

    /// Arc from `a` forward to `e`, both reduced to [0,1).
    pub fn arc(a: f64, e: f64) -> Self {
        let a = if a >= 1.0 { a - 1.0 } else { a };
        let e = if e >= 1.0 { e - 1.0 } else { e };
        Seg { a, e, wraps: e < a }
    }

    pub fn len(&self) -> f64 {
        if self.wraps {
            self.e + 1.0 - self.a
        } else {
            self.e - self.a
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() <= 0.0
    }

    pub fn contains_point(&self, x: f64) -> bool {
        if self.wraps {
            x >= self.a || x <= self.e
        } else {
            self.a <= x && x <= self.e
        }
    }

    // position key along the arc starting at `a`
    fn key(&self, x: f64) -> (bool, f64) {
        (self.wraps && x < self.a, x)
    }

    fn before(&self, x: f64, y: f64) -> bool {
        let (kx, ky) = (self.key(x), self.key(y));
        kx.0 < ky.0 || (kx.0 == ky.0 && kx.1 <= ky.1)
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &Seg) -> bool {
        self.contains_point(other.a)
            && self.contains_point(other.e)
            && self.before(other.a, other.e)
            && !(other.wraps && !self.wraps)
    }

    /// Interiors intersect.
    pub fn overlaps(&self, other: &Seg) -> bool {
        let starts_inside = |s: &Seg, x: f64| s.contains_point(x) && x != s.e && !s.is_empty();
        starts_inside(self, other.a) || starts_inside(other, self.a)
    }

    pub fn midpoint(&self) -> f64 {
        let m = self.a + 0.5 * self.len();
        if self.wraps && m >= 1.0 {
            m - 1.0
        } else {
            m
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharInterval {
    pub j: Seg,
    pub hull: Seg,
    pub j0: isize,
    /// Extended index of the left knot of `J`.
    pub left: isize,
    pub lambda0: Vec<isize>,
    pub lambda1: Vec<isize>,
}

impl CharInterval {
    pub fn len(&self) -> f64 {
        self.j.len()
    }

    pub fn is_empty(&self) -> bool {
        self.j.is_empty()
    }
}

/// Relative tolerance under which two `|alpha_j|` count as tied for the
/// maximum.
pub const LAMBDA1_TIE: f64 = 1e-12;

fn seg_of(p: &Partition, lo: isize, hi: isize) -> Seg {
    if p.is_periodic() {
        let n = p.n() as isize;
        let knot = |i: isize| p.knots()[i.rem_euclid(n) as usize];
        let (a, e) = (knot(lo), knot(hi));
        Seg {
            a,
            e,
            wraps: e < a || (e == a && hi > lo && p.tau(hi) > p.tau(lo)),
        }
    } else {
        Seg::interval(p.tau(lo), p.tau(hi))
    }
}

/// Characteristic interval of the function with dual coefficients
/// `alpha_j`, `j = i0-k ..= i0`, on the fine partition `p`. Ties for the
/// largest `|alpha_j|` resolve to the smallest index, ties for the longest
/// grid interval to the leftmost.
pub fn characteristic_interval(p: &Partition, i0: isize, alpha: &[f64]) -> Result<CharInterval> {
    let k = p.k() as isize;
    if alpha.len() != (k + 1) as usize {
        return Err(Error::Degenerate(format!(
            "expected {} coefficients",
            k + 1
        )));
    }
    if p.is_periodic() && (p.n() as isize) < 2 * k {
        return Err(Error::Unsupported(
            "periodic characteristic interval needs n >= 2k".into(),
        ));
    }
    let window: Vec<isize> = (i0 - k..=i0).collect();
    let min_nu = window
        .iter()
        .map(|&j| p.nu(j))
        .fold(f64::INFINITY, f64::min);
    let lambda0: Vec<isize> = window
        .iter()
        .copied()
        .filter(|&j| p.nu(j) <= 2.0 * min_nu)
        .collect();
    let amax = lambda0
        .iter()
        .map(|&j| alpha[(j - i0 + k) as usize].abs())
        .fold(0.0, f64::max);
    let lambda1: Vec<isize> = lambda0
        .iter()
        .copied()
        .filter(|&j| alpha[(j - i0 + k) as usize].abs() >= amax * (1.0 - LAMBDA1_TIE))
        .collect();
    let j0 = lambda1[0];
    let mut best = j0;
    for r in j0 + 1..j0 + k {
        if p.tau(r + 1) - p.tau(r) > p.tau(best + 1) - p.tau(best) {
            best = r;
        }
    }
    if p.tau(best + 1) <= p.tau(best) {
        return Err(Error::Degenerate(
            "all grid intervals of J0 have zero length".into(),
        ));
    }
    Ok(CharInterval {
        j: seg_of(p, best, best + 1),
        hull: seg_of(p, j0, j0 + k),
        j0,
        left: p.wrap(best),
        lambda0,
        lambda1,
    })
}

/// Number of partition entries, with multiplicity, between `z` and `J`,
/// endpoints included; 0 when `z ∈ J`. Clamped partitions count the
/// boundary copies `tau_{-k}..tau_{-1}` and `tau_n..tau_{n+k-1}` as well.
pub fn distance_count(p: &Partition, z: f64, j: &CharInterval) -> Result<usize> {
    if p.is_periodic() {
        let ell = cell_index_of(p, z);
        let enc = minimal_enclosure(p, j, ell)?;
        return Ok(d_hat_in(p, &enc.c, &j.j, z));
    }
    let (a, b) = (j.j.a, j.j.e);
    Ok(if z >= a && z <= b {
        0
    } else if z > b {
        p.knots().iter().filter(|&&t| t >= b && t <= z).count()
    } else {
        p.knots().iter().filter(|&&t| t >= z && t <= a).count()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnclosureInfo {
    pub c: Seg,
    /// Grid points of the periodic partition inside `C`, with multiplicity.
    pub k_count: usize,
}

// Periodic cell [sigma_l, sigma_{l+1}] containing x.
fn cell_index_of(p: &Partition, x: f64) -> isize {
    let pts = p.knots();
    let c = pts.partition_point(|&t| t <= x) as isize - 1;
    if c < 0 {
        p.n() as isize - 1
    } else {
        c
    }
}

/// Shortest arc containing `Ĵ` and `[sigma_l, sigma_{l+1}]`; equal lengths
/// resolve to the smaller left endpoint.
pub fn minimal_enclosure(p: &Partition, j: &CharInterval, ell: isize) -> Result<EnclosureInfo> {
    if !p.is_periodic() {
        return Err(Error::Unsupported(
            "minimal enclosure on a clamped partition".into(),
        ));
    }
    if p.n() < 2 * p.k() {
        return Err(Error::Unsupported("minimal enclosure needs n >= 2k".into()));
    }
    let cell = seg_of(p, ell, ell + 1);
    let jj = j.j;
    let mut cands = vec![jj, cell];
    for (s, t) in [(jj, cell), (cell, jj)] {
        cands.push(Seg {
            a: s.a,
            e: t.e,
            wraps: t.e < s.a,
        });
    }
    let c = cands
        .into_iter()
        .filter(|c| c.contains(&jj) && c.contains(&cell))
        .min_by(|x, y| x.len().total_cmp(&y.len()).then(x.a.total_cmp(&y.a)))
        .ok_or_else(|| Error::Degenerate("no enclosing arc".into()))?;
    let k_count = p.knots().iter().filter(|&&t| c.contains_point(t)).count();
    Ok(EnclosureInfo { c, k_count })
}

// Grid points in C between x and J, counting x and the endpoints of J.
fn d_hat_in(p: &Partition, c: &Seg, j: &Seg, x: f64) -> usize {
    if j.contains_point(x) {
        return 0;
    }
    let between = if c.before(x, j.a) {
        Seg {
            a: x,
            e: j.a,
            wraps: j.a < x,
        }
    } else {
        Seg {
            a: j.e,
            e: x,
            wraps: x < j.e,
        }
    };
    p.knots()
        .iter()
        .filter(|&&t| between.contains_point(t))
        .count()
}

/// `d̂_n(x)` for a periodic characteristic interval.
pub fn periodic_distance_count(p: &Partition, j: &CharInterval, x: f64) -> Result<usize> {
    let ell = cell_index_of(p, x);
    let enc = minimal_enclosure(p, j, ell)?;
    Ok(d_hat_in(p, &enc.c, &j.j, x))
}

/// `min_{x ∈ V} d̂_n(x)`, evaluated on the endpoints of V, the grid points
/// inside V and one interior point per grid cell meeting V.
pub fn periodic_distance_to_set(p: &Partition, j: &CharInterval, v: &Seg) -> Result<usize> {
    if v.overlaps(&j.j) || v.contains_point(j.j.a) || v.contains_point(j.j.e) {
        return Ok(0);
    }
    let mut cands = vec![v.a, v.e];
    let pts = p.knots();
    for (i, &t) in pts.iter().enumerate() {
        if v.contains_point(t) {
            cands.push(t);
        }
        let cell = seg_of(p, i as isize, i as isize + 1);
        if cell.overlaps(v) {
            let m = cell.midpoint();
            if v.contains_point(m) {
                cands.push(m);
            }
        }
    }
    let mut best = usize::MAX;
    for x in cands {
        best = best.min(periodic_distance_count(p, j, x)?);
    }
    Ok(best)
}

/// `card{n : J_n ⊆ V, |J_n| >= beta |V|}`.
pub fn count_large_nested(js: &[CharInterval], v: &Seg, beta: f64) -> Result<usize> {
    if !(beta > 0.0) {
        return Err(Error::Degenerate(format!(
            "beta must be positive, got {beta}"
        )));
    }
    let lv = v.len();
    Ok(js
        .iter()
        .filter(|j| v.contains(&j.j) && j.len() >= beta * lv)
        .count())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NestedFit {
    pub c: f64,
    pub kappa: f64,
}

/// Fits `|J_{n_i}| <= C kappa^i |J_{n_1}|` on a decreasing chain, with
/// `kappa` from least squares in the log domain and `C` the smallest
/// constant making the bound hold. A chain of length 1 has no fit.
pub fn nested_decay_ratio(chain: &[CharInterval]) -> Result<Option<NestedFit>> {
    for i in 1..chain.len() {
        if !chain[i - 1].j.contains(&chain[i].j) {
            return Err(Error::NotNested(i));
        }
    }
    if chain.len() < 2 {
        return Ok(None);
    }
    let l1 = chain[0].len();
    let pts: Vec<(f64, f64)> = chain
        .iter()
        .enumerate()
        .map(|(i, j)| ((i + 1) as f64, (j.len() / l1).ln()))
        .collect();
    let (slope, _) = least_squares(&pts);
    let kappa = slope.exp();
    let c = chain
        .iter()
        .enumerate()
        .map(|(i, j)| j.len() / (l1 * kappa.powi(i as i32 + 1)))
        .fold(0.0, f64::max);
    Ok(Some(NestedFit { c, kappa }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_split() {
        let p = Partition::clamped(1, &[0.3]).unwrap();
        let ci = characteristic_interval(&p, 0, &[1.0, -1.0]).unwrap();
        assert_eq!(ci.lambda0, vec![-1]);
        assert_eq!(ci.j, Seg::interval(0.0, 0.3));
    }

    #[test]
    fn uniform_tie_breaks_left() {
        let p = Partition::clamped(2, &[0.25, 0.5, 0.75]).unwrap();
        let ci = characteristic_interval(&p, 1, &[0.5, -1.0, 0.5]).unwrap();
        assert_eq!(ci.lambda0, vec![-1, 0, 1]);
        assert_eq!(ci.j0, 0);
        assert_eq!(ci.j, Seg::interval(0.25, 0.5));
        let ci = characteristic_interval(&p, 1, &[1.0, -1.0, 1.0]).unwrap();
        assert_eq!(ci.lambda1, vec![-1, 0, 1]);
        assert_eq!(ci.j0, -1);
    }

    #[test]
    fn distances_clamped() {
        let p = Partition::clamped(1, &[0.2, 0.4, 0.6, 0.8]).unwrap();
        let ci = characteristic_interval(&p, 1, &[1.0, -1.0]).unwrap();
        assert_eq!(ci.j, Seg::interval(0.2, 0.4));
        assert_eq!(distance_count(&p, 0.3, &ci).unwrap(), 0);
        assert_eq!(distance_count(&p, 0.5, &ci).unwrap(), 1);
        assert_eq!(distance_count(&p, 0.6, &ci).unwrap(), 2);
        assert_eq!(distance_count(&p, 1.0, &ci).unwrap(), 4);
    }

    #[test]
    fn arcs() {
        let a = Seg::arc(0.9, 0.1);
        assert!(a.wraps);
        assert!(a.contains_point(0.95) && a.contains_point(0.05) && !a.contains_point(0.5));
        assert!(a.contains(&Seg::arc(0.95, 0.05)));
        assert!(!a.contains(&Seg::arc(0.05, 0.95)));
        assert!(!Seg::interval(0.2, 0.4).overlaps(&Seg::interval(0.4, 0.6)));
        assert!(Seg::interval(0.2, 0.5).overlaps(&Seg::interval(0.4, 0.6)));
    }

    #[test]
    fn chain_of_one() {
        let p = Partition::clamped(1, &[0.5]).unwrap();
        let ci = characteristic_interval(&p, 0, &[1.0, -1.0]).unwrap();
        assert_eq!(nested_decay_ratio(&[ci]).unwrap(), None);
    }
}
