//! Geometric-decay fits `value <= C q^d`.

/// Result of fitting `log v ≈ log C + d log q` to the upper envelope of
/// `(d, v)` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Smallest constant with `v <= C q^d` on every sample.
    pub c: f64,
    pub q: f64,
    /// RMS of the log-envelope residuals.
    pub residual: f64,
    /// Number of distinct distances in the fit.
    pub distances: usize,
}

impl DecayFit {
    pub fn accepted(&self) -> bool {
        self.q < 1.0
    }

    fn degenerate(c: f64) -> Self {
        DecayFit {
            c,
            q: 0.0,
            residual: 0.0,
            distances: 1,
        }
    }
}

/// Least squares on the per-distance maxima. Samples with nonpositive
/// values are ignored; a single distance yields `q = 0`.
pub fn envelope_fit(samples: &[(usize, f64)]) -> Option<DecayFit> {
    let mut env: Vec<(usize, f64)> = Vec::new();
    let mut sorted: Vec<(usize, f64)> = samples
        .iter()
        .copied()
        .filter(|&(_, v)| v > 0.0 && v.is_finite())
        .collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    for (d, v) in sorted {
        match env.last_mut() {
            Some(last) if last.0 == d => last.1 = last.1.max(v),
            _ => env.push((d, v)),
        }
    }
    if env.is_empty() {
        return None;
    }
    if env.len() == 1 {
        return Some(DecayFit::degenerate(env[0].1));
    }
    let pts: Vec<(f64, f64)> = env.iter().map(|&(d, v)| (d as f64, v.ln())).collect();
    let (slope, intercept) = least_squares(&pts);
    let residual = (pts
        .iter()
        .map(|&(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / pts.len() as f64)
        .sqrt();
    let q = slope.exp();
    let c = env
        .iter()
        .map(|&(d, v)| v / q.powi(d as i32))
        .fold(0.0, f64::max);
    Some(DecayFit {
        c,
        q,
        residual,
        distances: env.len(),
    })
}

/// Slope and intercept of the ordinary least-squares line.
pub fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_geometric_sequence() {
        let s: Vec<(usize, f64)> = (0..20).map(|d| (d, 3.0 * 0.4f64.powi(d as i32))).collect();
        let f = envelope_fit(&s).unwrap();
        assert!((f.q - 0.4).abs() < 1e-12);
        assert!((f.c - 3.0).abs() < 1e-10);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn envelope_dominates_samples() {
        let s = vec![(0, 1.0), (1, 0.3), (1, 0.5), (2, 0.1), (3, 0.05)];
        let f = envelope_fit(&s).unwrap();
        for (d, v) in s {
            assert!(v <= f.c * f.q.powi(d as i32) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn single_distance_is_degenerate() {
        let f = envelope_fit(&[(0, 2.0), (0, 1.0)]).unwrap();
        assert_eq!(f.q, 0.0);
        assert_eq!(f.c, 2.0);
        assert!(envelope_fit(&[]).is_none());
    }
}
