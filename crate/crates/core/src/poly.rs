//! Dense polynomials in the power basis and real-root isolation.

/// `c[0] + c[1] x + ... + c[d] x^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub c: Vec<f64>,
}

impl Poly {
    pub fn new(c: Vec<f64>) -> Self {
        Self { c }
    }

    /// Degree after dropping exact zero leading terms; `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.c.iter().rposition(|&v| v != 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &v)| i as f64 * v)
                .collect(),
        )
    }

    pub fn add_constant(&self, v: f64) -> Poly {
        let mut c = self.c.clone();
        if c.is_empty() {
            c.push(0.0);
        }
        c[0] += v;
        Poly::new(c)
    }

    /// Real roots in [a,b], sorted, found by splitting at the roots of the
    /// derivative and bisecting every sign change to machine precision.
    pub fn roots_in(&self, a: f64, b: f64) -> Vec<f64> {
        let Some(deg) = self.degree() else {
            return Vec::new();
        };
        if deg == 0 {
            return Vec::new();
        }
        if deg == 1 {
            let r = -self.c[0] / self.c[1];
            return if (a..=b).contains(&r) {
                vec![r]
            } else {
                Vec::new()
            };
        }
        let mut pts = vec![a];
        pts.extend(self.derivative().roots_in(a, b));
        pts.push(b);
        let mut roots: Vec<f64> = Vec::new();
        let mut push = |r: f64| {
            if roots.last().is_none_or(|&last| r > last) {
                roots.push(r);
            }
        };
        for w in pts.windows(2) {
            let (u, v) = (w[0], w[1]);
            let (fu, fv) = (self.eval(u), self.eval(v));
            if fu == 0.0 {
                push(u);
            } else if fu * fv < 0.0 {
                push(bisect(|x| self.eval(x), u, v, fu));
            }
        }
        if self.eval(b) == 0.0 {
            push(b);
        }
        roots
    }

    /// `max |p|` on [a,b], attained at an endpoint or a critical point.
    pub fn max_abs_on(&self, a: f64, b: f64) -> f64 {
        let mut m = self.eval(a).abs().max(self.eval(b).abs());
        for r in self.derivative().roots_in(a, b) {
            m = m.max(self.eval(r).abs());
        }
        m
    }
}

/// Bisection on a bracket with `f(u)` of sign `fu`, down to adjacent floats.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut u: f64, mut v: f64, fu: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (u + v);
        if m <= u || m >= v {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fu < 0.0) {
            u = m;
        } else {
            v = m;
        }
    }
    0.5 * (u + v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemezOutcome {
    /// Measure of `{x in V : |p(x)| >= threshold}`.
    pub measure: f64,
    pub length: f64,
    pub threshold: f64,
    pub sup: f64,
    pub pass: bool,
}

/// Measures the set where a polynomial of order `k` (degree `< k`) stays
/// above `8^{1-k}` times its sup on `V = [a,b]`. The set must fill at
/// least half of V.
pub fn remez_check(p: &Poly, a: f64, b: f64, k: usize) -> crate::Result<RemezOutcome> {
    if k == 0 {
        return Err(crate::Error::InvalidOrder(k));
    }
    if p.degree().is_some_and(|d| d >= k) {
        return Err(crate::Error::Unsupported(format!(
            "degree {} exceeds order {k}",
            p.degree().unwrap()
        )));
    }
    let length = b - a;
    // the measure is scale invariant; normalizing keeps tiny coefficients
    // out of the subnormal range
    let scale = p.c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Ok(RemezOutcome {
            measure: length,
            length,
            threshold: 0.0,
            sup: 0.0,
            pass: true,
        });
    }
    let p = &Poly::new(p.c.iter().map(|v| v / scale).collect());
    let sup = p.max_abs_on(a, b);
    if sup == 0.0 {
        return Ok(RemezOutcome {
            measure: length,
            length,
            threshold: 0.0,
            sup,
            pass: true,
        });
    }
    let threshold = 8f64.powi(1 - k as i32) * sup;
    let mut cuts = vec![a, b];
    cuts.extend(p.add_constant(-threshold).roots_in(a, b));
    cuts.extend(p.add_constant(threshold).roots_in(a, b));
    cuts.sort_by(f64::total_cmp);
    let measure = cuts
        .windows(2)
        .filter(|w| p.eval(0.5 * (w[0] + w[1])).abs() >= threshold)
        .map(|w| w[1] - w[0])
        .sum::<f64>();
    Ok(RemezOutcome {
        measure,
        length,
        threshold: threshold * scale,
        sup: sup * scale,
        pass: measure >= 0.5 * length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_product() {
        // (x-0.1)(x-0.5)(x-0.9)
        let p = Poly::new(vec![-0.045, 0.59, -1.5, 1.0]);
        let r = p.roots_in(0.0, 1.0);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([0.1, 0.5, 0.9]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn remez_linear() {
        let out = remez_check(&Poly::new(vec![0.0, 1.0]), 0.0, 1.0, 2).unwrap();
        assert!((out.measure - 0.875).abs() < 1e-15);
        assert!(out.pass);
    }

    #[test]
    fn remez_constant_and_zero() {
        let out = remez_check(&Poly::new(vec![3.0]), 0.0, 2.0, 1).unwrap();
        assert_eq!(out.measure, 2.0);
        assert!(
            remez_check(&Poly::new(vec![0.0, 0.0]), 0.0, 1.0, 2)
                .unwrap()
                .pass
        );
    }

    #[test]
    fn remez_subnormal_coefficients() {
        let tiny = Poly::new(vec![0.0, 3e-310]);
        let out = remez_check(&tiny, 0.0, 1.0, 2).unwrap();
        assert!(out.pass);
        assert!((out.measure - 7.0 / 8.0).abs() < 1e-14);
    }

    #[test]
    fn remez_rejects_high_degree() {
        assert!(remez_check(&Poly::new(vec![0.0, 0.0, 1.0]), 0.0, 1.0, 2).is_err());
    }
}
