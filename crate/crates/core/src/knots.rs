//! Admissible knot sequences and the partitions they induce.
//!
//! Public indices follow the usual spline convention: a clamped partition
//! with `n` interior knots is addressed by `-k..n+k`, a periodic one by any
//! integer, with `tau(i + r*n) = tau(i) + r`.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Interval,
    Torus,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Interval => "interval",
            Domain::Torus => "torus",
        }
    }
}

impl std::str::FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interval" => Ok(Domain::Interval),
            "torus" => Ok(Domain::Torus),
            other => Err(Error::Parse(format!("unknown domain `{other}`"))),
        }
    }
}

/// Points in insertion order. Interval points live in the open interval
/// (0,1) because 0 and 1 already carry multiplicity k in the clamped
/// partition; torus points live in [0,1).
#[derive(Debug, Clone, PartialEq)]
pub struct KnotSequence {
    domain: Domain,
    k: usize,
    points: Vec<f64>,
}

impl KnotSequence {
    pub fn new(domain: Domain, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidOrder(k));
        }
        Ok(Self {
            domain,
            k,
            points: Vec::new(),
        })
    }

    pub fn from_points(domain: Domain, k: usize, points: &[f64]) -> Result<Self> {
        let mut seq = Self::new(domain, k)?;
        for &x in points {
            seq.push(x)?;
        }
        Ok(seq)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Position the point would take in the sorted partition: the number of
    /// existing points `<= x`, i.e. the last slot among equal knots.
    pub fn insertion_index(&self, x: f64) -> isize {
        self.points.iter().filter(|&&p| p <= x).count() as isize
    }

    /// Appends `x` and returns the insertion index `i0`.
    pub fn push(&mut self, x: f64) -> Result<isize> {
        self.check_point(x)?;
        let i0 = self.insertion_index(x);
        self.points.push(x);
        Ok(i0)
    }

    pub fn insert_point(&self, x: f64) -> Result<(KnotSequence, isize)> {
        let mut next = self.clone();
        let i0 = next.push(x)?;
        Ok((next, i0))
    }

    pub fn prefix(&self, len: usize) -> KnotSequence {
        KnotSequence {
            domain: self.domain,
            k: self.k,
            points: self.points[..len.min(self.points.len())].to_vec(),
        }
    }

    pub fn partition(&self) -> Result<Partition> {
        match self.domain {
            Domain::Interval => Partition::clamped(self.k, &self.points),
            Domain::Torus => Partition::periodic(self.k, &self.points),
        }
    }

    fn check_point(&self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::OutOfDomain(x));
        }
        match self.domain {
            Domain::Torus if !(0.0..1.0).contains(&x) => return Err(Error::OutOfDomain(x)),
            Domain::Interval if !(0.0..=1.0).contains(&x) => return Err(Error::OutOfDomain(x)),
            Domain::Interval if x == 0.0 || x == 1.0 => {
                return Err(Error::Admissibility {
                    value: x,
                    count: self.k + 1,
                    k: self.k,
                })
            }
            _ => {}
        }
        let count = self.points.iter().filter(|&&p| p == x).count() + 1;
        if count > self.k {
            return Err(Error::Admissibility {
                value: x,
                count,
                k: self.k,
            });
        }
        Ok(())
    }

    /// Line format: `k=<int> domain=<interval|torus>` followed by one knot
    /// per line in insertion order.
    pub fn to_text(&self) -> String {
        let mut out = format!("k={} domain={}\n", self.k, self.domain.name());
        for x in &self.points {
            let _ = writeln!(out, "{x:.16e}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing header".into()))?;
        let mut k = None;
        let mut domain = None;
        for field in header.split_whitespace() {
            match field.split_once('=') {
                Some(("k", v)) => {
                    k = Some(
                        v.parse::<usize>()
                            .map_err(|e| Error::Parse(format!("k: {e}")))?,
                    )
                }
                Some(("domain", v)) => domain = Some(v.parse::<Domain>()?),
                _ => return Err(Error::Parse(format!("bad header field `{field}`"))),
            }
        }
        let k = k.ok_or_else(|| Error::Parse("header lacks k".into()))?;
        let domain = domain.ok_or_else(|| Error::Parse("header lacks domain".into()))?;
        let mut seq = Self::new(domain, k)?;
        for line in lines {
            let x = line
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("knot `{line}`: {e}")))?;
            seq.push(x)?;
        }
        Ok(seq)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PartitionKind {
    Clamped,
    Periodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    kind: PartitionKind,
    k: usize,
    n: usize,
    // clamped: tau_{-k} ..= tau_{n+k-1}; periodic: sigma_0 .. sigma_{n-1}
    knots: Vec<f64>,
}

fn check_multiplicity(k: usize, sorted: &[f64]) -> Result<()> {
    let mut run = 0;
    for (i, &x) in sorted.iter().enumerate() {
        run = if i > 0 && sorted[i - 1] == x {
            run + 1
        } else {
            1
        };
        if run > k {
            return Err(Error::Admissibility {
                value: x,
                count: run,
                k,
            });
        }
    }
    Ok(())
}

fn sorted(points: &[f64]) -> Vec<f64> {
    let mut v = points.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

impl Partition {
    pub fn clamped(k: usize, interior: &[f64]) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidOrder(k));
        }
        if let Some(&x) = interior.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
            return Err(if (0.0..=1.0).contains(&x) {
                Error::Admissibility {
                    value: x,
                    count: k + 1,
                    k,
                }
            } else {
                Error::OutOfDomain(x)
            });
        }
        let inner = sorted(interior);
        check_multiplicity(k, &inner)?;
        let n = inner.len();
        let mut knots = vec![0.0; k];
        knots.extend_from_slice(&inner);
        knots.extend(std::iter::repeat_n(1.0, k));
        Ok(Self {
            kind: PartitionKind::Clamped,
            k,
            n,
            knots,
        })
    }

    pub fn periodic(k: usize, points: &[f64]) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidOrder(k));
        }
        if points.is_empty() {
            return Err(Error::Degenerate("periodic partition needs a point".into()));
        }
        if let Some(&x) = points.iter().find(|&&x| !(0.0..1.0).contains(&x)) {
            return Err(Error::OutOfDomain(x));
        }
        let knots = sorted(points);
        check_multiplicity(k, &knots)?;
        Ok(Self {
            kind: PartitionKind::Periodic,
            k,
            n: knots.len(),
            knots,
        })
    }

    pub fn kind(&self) -> PartitionKind {
        self.kind
    }

    pub fn is_periodic(&self) -> bool {
        self.kind == PartitionKind::Periodic
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of interior (clamped) or torus (periodic) points.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension of the spline space.
    pub fn dim(&self) -> usize {
        match self.kind {
            PartitionKind::Clamped => self.n + self.k,
            PartitionKind::Periodic => self.n,
        }
    }

    /// First basis index: `-k` clamped, `0` periodic.
    pub fn first_index(&self) -> isize {
        match self.kind {
            PartitionKind::Clamped => -(self.k as isize),
            PartitionKind::Periodic => 0,
        }
    }

    /// One past the last basis index (`n` in both cases).
    pub fn end_index(&self) -> isize {
        self.n as isize
    }

    pub fn indices(&self) -> std::ops::Range<isize> {
        self.first_index()..self.end_index()
    }

    /// Sorted interior points, without boundary copies.
    pub fn interior(&self) -> &[f64] {
        match self.kind {
            PartitionKind::Clamped => &self.knots[self.k..self.k + self.n],
            PartitionKind::Periodic => &self.knots,
        }
    }

    /// Knot `tau_i` (paper index). Clamped indices outside `-k..n+k` are
    /// clipped to the boundary values.
    pub fn tau(&self, i: isize) -> f64 {
        match self.kind {
            PartitionKind::Clamped => {
                let s = i + self.k as isize;
                if s < 0 {
                    0.0
                } else {
                    self.knots.get(s as usize).copied().unwrap_or(1.0)
                }
            }
            PartitionKind::Periodic => {
                let n = self.n as isize;
                let r = i.div_euclid(n);
                self.knots[i.rem_euclid(n) as usize] + r as f64
            }
        }
    }

    /// All knots with multiplicity. Clamped: `tau_{-k}..=tau_{n+k-1}`.
    /// Periodic: `sigma_0..sigma_{n-1}`.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Reduces a periodic index modulo n; identity on clamped partitions.
    pub fn wrap(&self, i: isize) -> isize {
        match self.kind {
            PartitionKind::Clamped => i,
            PartitionKind::Periodic => i.rem_euclid(self.n as isize),
        }
    }

    /// 0-based storage slot of a basis index.
    pub fn storage(&self, i: isize) -> usize {
        (self.wrap(i) - self.first_index()) as usize
    }

    /// Inverse of [`storage`](Self::storage).
    pub fn index_of(&self, slot: usize) -> isize {
        slot as isize + self.first_index()
    }

    pub fn check_index(&self, i: isize) -> Result<()> {
        if self.is_periodic() || self.indices().contains(&i) {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                lo: self.first_index(),
                hi: self.end_index(),
            })
        }
    }

    /// `[tau_i, tau_{i+k}]`; periodic supports may extend past 1.
    pub fn support(&self, i: isize) -> (f64, f64) {
        (self.tau(i), self.tau(i + self.k as isize))
    }

    pub fn nu(&self, i: isize) -> f64 {
        let (a, b) = self.support(i);
        b - a
    }

    /// Distinct breakpoints in [0,1], always including 0 and 1.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        for &x in self.interior() {
            if x > *out.last().unwrap() {
                out.push(x);
            }
        }
        if *out.last().unwrap() < 1.0 {
            out.push(1.0);
        }
        out
    }

    /// Partition refined by `x`, together with the insertion index.
    pub fn with_inserted(&self, x: f64) -> Result<(Partition, isize)> {
        let i0 = self.interior().iter().filter(|&&p| p <= x).count() as isize;
        let mut pts = self.interior().to_vec();
        pts.push(x);
        let p = match self.kind {
            PartitionKind::Clamped => Partition::clamped(self.k, &pts)?,
            PartitionKind::Periodic => Partition::periodic(self.k, &pts)?,
        };
        Ok((p, i0))
    }

    /// Partition with the knot at index `i0` removed.
    pub fn with_removed(&self, i0: isize) -> Result<Partition> {
        if !(0..self.n as isize).contains(&i0) {
            return Err(Error::IndexOutOfRange {
                index: i0,
                lo: 0,
                hi: self.n as isize,
            });
        }
        let mut pts = self.interior().to_vec();
        pts.remove(i0 as usize);
        match self.kind {
            PartitionKind::Clamped => Partition::clamped(self.k, &pts),
            PartitionKind::Periodic => Partition::periodic(self.k, &pts),
        }
    }
}

pub fn clamped_partition(seq: &KnotSequence) -> Result<Partition> {
    if seq.domain() != Domain::Interval {
        return Err(Error::Unsupported(
            "clamped partition of a torus sequence".into(),
        ));
    }
    Partition::clamped(seq.k(), seq.points())
}

pub fn periodic_partition(seq: &KnotSequence) -> Result<Partition> {
    if seq.domain() != Domain::Torus {
        return Err(Error::Unsupported(
            "periodic partition of an interval sequence".into(),
        ));
    }
    Partition::periodic(seq.k(), seq.points())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximalSplitting {
    /// Clamped partition with `tau_j = sigma'_j`.
    pub clamped: Partition,
    /// The periodic partition in rotated coordinates.
    pub periodic: Partition,
    /// Cut point in original coordinates; `x' = (x - rotation) mod 1`.
    pub rotation: f64,
    /// Original index of the point that becomes `sigma'_0`.
    pub shift: usize,
}

impl MaximalSplitting {
    /// Rotated index of the original periodic index `i`.
    pub fn map_index(&self, i: isize) -> isize {
        (i - self.shift as isize).rem_euclid(self.periodic.n() as isize)
    }

    pub fn map_point(&self, x: f64) -> f64 {
        let y = x - self.rotation;
        if y < 0.0 {
            y + 1.0
        } else {
            y
        }
    }
}

/// Cuts the torus in the middle of a largest gap. Ties go to the gap with
/// the smallest left endpoint.
pub fn maximal_splitting(p: &Partition) -> Result<MaximalSplitting> {
    if !p.is_periodic() {
        return Err(Error::Unsupported(
            "maximal splitting of a clamped partition".into(),
        ));
    }
    let s = p.interior();
    let n = s.len();
    // gap m sits between sigma_{m-1} and sigma_m; gap 0 is the wrap gap
    let gap = |m: usize| {
        if m == 0 {
            s[0] + 1.0 - s[n - 1]
        } else {
            s[m] - s[m - 1]
        }
    };
    let left = |m: usize| if m == 0 { s[n - 1] } else { s[m - 1] };
    let mut best = 0;
    for m in 1..n {
        let (g, b) = (gap(m), gap(best));
        if g > b || (g == b && left(m) < left(best)) {
            best = m;
        }
    }
    let mut rotation = left(best) + 0.5 * gap(best);
    if rotation >= 1.0 {
        rotation -= 1.0;
    }
    let rotated: Vec<f64> = (0..n)
        .map(|j| {
            let y = s[(j + best) % n] - rotation;
            if y < 0.0 {
                y + 1.0
            } else {
                y
            }
        })
        .collect();
    Ok(MaximalSplitting {
        clamped: Partition::clamped(p.k(), &rotated)?,
        periodic: Partition::periodic(p.k(), &rotated)?,
        rotation,
        shift: best,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodicIndex {
    pub n: usize,
    pub value: isize,
}

impl PeriodicIndex {
    pub fn new(n: usize, value: isize) -> Self {
        Self { n, value }
    }
}

/// `min(|i-j|, n-|i-j|)` on residues.
pub fn periodic_distance(i: PeriodicIndex, j: PeriodicIndex) -> Result<usize> {
    if i.n != j.n {
        return Err(Error::ModulusMismatch(i.n, j.n));
    }
    Ok(cyclic_distance(i.n, i.value, j.value))
}

pub fn cyclic_distance(n: usize, i: isize, j: isize) -> usize {
    let d = (i - j).rem_euclid(n as isize) as usize;
    d.min(n - d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_insertion() {
        let seq = KnotSequence::new(Domain::Interval, 2).unwrap();
        let (seq, i0) = seq.insert_point(0.5).unwrap();
        assert_eq!(seq.points(), &[0.5]);
        assert_eq!(i0, 0);
    }

    #[test]
    fn multiplicity_overflow() {
        let seq = KnotSequence::from_points(Domain::Interval, 2, &[0.5, 0.5]).unwrap();
        assert!(matches!(
            seq.insert_point(0.5),
            Err(Error::Admissibility { count: 3, .. })
        ));
    }

    #[test]
    fn boundary_points_overflow_clamped() {
        let seq = KnotSequence::new(Domain::Interval, 2).unwrap();
        assert!(seq.insert_point(0.0).is_err());
        assert!(seq.insert_point(1.0).is_err());
        let torus = KnotSequence::new(Domain::Torus, 2).unwrap();
        assert!(torus.insert_point(0.0).is_ok());
        assert!(torus.insert_point(1.0).is_err());
    }

    #[test]
    fn clamped_examples() {
        let p = Partition::clamped(2, &[0.5]).unwrap();
        assert_eq!(p.knots(), &[0.0, 0.0, 0.5, 1.0, 1.0]);
        assert_eq!(p.n(), 1);
        assert_eq!(p.tau(-2), 0.0);
        assert_eq!(p.tau(0), 0.5);
        let p = Partition::clamped(3, &[]).unwrap();
        assert_eq!(p.knots(), &[0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let p = Partition::clamped(2, &[0.25, 0.25]).unwrap();
        assert_eq!(p.knots(), &[0.0, 0.0, 0.25, 0.25, 1.0, 1.0]);
    }

    #[test]
    fn periodic_extension() {
        let p = Partition::periodic(2, &[0.1, 0.6]).unwrap();
        assert_eq!(p.tau(2), 1.1);
        assert_eq!(p.tau(-1), 0.6 - 1.0);
        assert_eq!(p.storage(-1), 1);
        assert_eq!(p.nu(1), p.tau(3) - 0.6);
    }

    #[test]
    fn maximal_splitting_examples() {
        let p = Partition::periodic(1, &[0.0, 0.2, 0.4]).unwrap();
        let ms = maximal_splitting(&p).unwrap();
        assert!((ms.rotation - 0.7).abs() < 1e-15);
        let r = ms.periodic.interior();
        for (a, b) in r.iter().zip([0.3, 0.5, 0.7]) {
            assert!((a - b).abs() < 1e-15);
        }
        let p = Partition::periodic(2, &[0.0, 0.25, 0.5, 0.75]).unwrap();
        let ms = maximal_splitting(&p).unwrap();
        assert_eq!(ms.periodic.interior()[0], 0.125);
        assert_eq!(ms.shift, 1);
    }

    #[test]
    fn distance_examples() {
        let d = |n, i, j| periodic_distance(PeriodicIndex::new(n, i), PeriodicIndex::new(n, j));
        assert_eq!(d(10, 1, 9).unwrap(), 2);
        assert_eq!(d(7, 3, 3).unwrap(), 0);
        assert!(periodic_distance(PeriodicIndex::new(3, 0), PeriodicIndex::new(4, 0)).is_err());
    }

    #[test]
    fn text_round_trip() {
        let seq = KnotSequence::from_points(Domain::Torus, 3, &[0.1, 1.0 / 3.0, 0.0]).unwrap();
        let back = KnotSequence::from_text(&seq.to_text()).unwrap();
        assert_eq!(seq, back);
        assert!(seq.to_text().starts_with("k=3 domain=torus\n"));
    }
}
