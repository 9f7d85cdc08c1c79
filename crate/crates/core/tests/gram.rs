mod common;

use std::sync::Arc;

use common::*;
use nalgebra::{DMatrix, DVector};
use orthospline::bspline::lp_norm_coeffs;
use orthospline::quadrature;
use orthospline::{build_gram, inner_product, Domain, Repr, Spline, SplineBasis};
use proptest::prelude::*;
use rand::Rng;

// Gram matrix from pointwise basis values and Gauss quadrature on every cell
fn oracle_gram(basis: &SplineBasis) -> DMatrix<f64> {
    let n = basis.dim();
    let br = basis.partition().breakpoints();
    let mut g = DMatrix::zeros(n, n);
    for w in br.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        quadrature::for_each_node(w[0], w[1], 10, |x, wt| {
            let v = basis.eval_all(x).unwrap();
            for i in 0..n {
                if v[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    g[(i, j)] += wt * v[i] * v[j];
                }
            }
        });
    }
    g
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn banded_solve_matches_dense(seed: u64, k in 1usize..=5, n in 1usize..=60, periodic: bool) {
        let mut r = rng(seed);
        let n = if periodic { n.max(k + 1) } else { n };
        let part = random_partition(&mut r, periodic, k, n);
        let basis = Arc::new(SplineBasis::new(part));
        let gram = build_gram(basis.clone()).unwrap();
        let dense = oracle_gram(&basis);
        let b: Vec<f64> = (0..basis.dim()).map(|_| r.gen_range(-1.0..1.0)).collect();
        let want = dense.clone().lu().solve(&DVector::from_vec(b.clone())).unwrap();
        let got = gram.solve(&b);
        let scale = want.amax().max(1.0);
        for (x, y) in got.iter().zip(want.iter()) {
            prop_assert!((x - y).abs() <= 1e-10 * scale, "{} vs {}", x, y);
        }
    }

    #[test]
    fn inverse_is_symmetric(seed: u64, k in 1usize..=5, periodic: bool) {
        let mut r = rng(seed);
        let part = random_partition(&mut r, periodic, k, 3 * k + 5);
        let gram = build_gram(Arc::new(SplineBasis::new(part.clone()))).unwrap();
        let scale = (0..part.dim()).map(|s| gram.inverse_column_slot(s).iter().fold(0.0f64, |m, v| m.max(v.abs()))).fold(0.0, f64::max);
        for i in part.indices() {
            for j in part.indices() {
                let d = (gram.inverse_entry(i, j) - gram.inverse_entry(j, i)).abs();
                prop_assert!(d <= 1e-12 * scale);
            }
        }
    }
}

#[test]
fn inverse_matches_dense_lu() {
    let mut r = rng(31);
    for periodic in [false, true] {
        let part = random_partition(&mut r, periodic, 3, 40);
        let basis = Arc::new(SplineBasis::new(part.clone()));
        let gram = build_gram(basis.clone()).unwrap();
        let inv = oracle_gram(&basis).lu().try_inverse().unwrap();
        let scale = inv.amax();
        for s in 0..part.dim() {
            for (t, v) in gram.inverse_column_slot(s).iter().enumerate() {
                assert!((v - inv[(t, s)]).abs() <= 1e-10 * scale);
            }
        }
    }
}

#[test]
fn dual_functions_are_biorthogonal() {
    let mut r = rng(32);
    for k in 1..=4 {
        for periodic in [false, true] {
            let part = random_partition(&mut r, periodic, k, 2 * k + 6);
            let basis = Arc::new(SplineBasis::new(part.clone()));
            let gram = build_gram(basis.clone()).unwrap();
            for i in 0..part.dim() {
                let mut e = vec![0.0; part.dim()];
                e[i] = 1.0;
                let dual = gram
                    .dual_to_primal(&Spline::new(basis.clone(), Repr::Dual, e).unwrap())
                    .unwrap();
                for j in 0..part.dim() {
                    let mut u = vec![0.0; part.dim()];
                    u[j] = 1.0;
                    let nj = Spline::primal(basis.clone(), u).unwrap();
                    let ip = inner_product(&dual, &nj).unwrap();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - want).abs() < 1e-9, "k={k} {i} {j} {ip}");
                }
            }
        }
    }
}

#[test]
fn dual_stability_is_bounded() {
    let mut r = rng(33);
    let p = 1.5;
    for k in 1..=4 {
        let mut range = (f64::INFINITY, 0.0f64);
        for case in 0..16 {
            let n = if case < 8 { 12 } else { 200 };
            let part = random_partition(&mut r, case % 2 == 1, k, n);
            let basis = Arc::new(SplineBasis::new(part.clone()));
            let gram = build_gram(basis.clone()).unwrap();
            let b: Vec<f64> = (0..part.dim()).map(|_| r.gen_range(-1.0..1.0)).collect();
            let h = gram.solve(&b);
            let hn = lp_norm_coeffs(&basis, &h, p, None).unwrap();
            let seq: f64 = part
                .indices()
                .map(|i| (b[part.storage(i)].abs() * part.nu(i).powf(1.0 / p - 1.0)).powf(p))
                .sum::<f64>()
                .powf(1.0 / p);
            let ratio = hn / seq;
            range = (range.0.min(ratio), range.1.max(ratio));
        }
        let ck = 2.0 * k as f64 * 9.0f64.powi(k as i32 - 1);
        assert!(range.0 >= 1.0 / ck && range.1 <= ck, "k={k} {range:?}");
    }
}

#[test]
fn projection_properties() {
    let mut r = rng(34);
    for periodic in [false, true] {
        let part = random_partition(&mut r, periodic, 3, 25);
        let basis = Arc::new(SplineBasis::new(part.clone()));
        let gram = build_gram(basis.clone()).unwrap();
        let one = gram.project(&|_| 1.0, &[]).unwrap();
        for s in 0..=50 {
            assert!((one.eval(s as f64 / 50.0).unwrap() - 1.0).abs() < 1e-9);
        }
        // idempotent on splines
        let c: Vec<f64> = (0..part.dim()).map(|_| r.gen_range(-1.0..1.0)).collect();
        let f = Spline::primal(basis.clone(), c.clone()).unwrap();
        let pf = gram
            .project(&|x| f.eval(x).unwrap(), &part.breakpoints())
            .unwrap();
        for (a, b) in pf.coeffs.iter().zip(&c) {
            assert!((a - b).abs() < 1e-9);
        }
        // self-adjoint on two non-spline functions
        let h1 = |x: f64| (7.0 * x).sin() + x * x;
        let h2 = |x: f64| (3.0 * x).exp();
        let p1 = gram.project(&h1, &[]).unwrap();
        let p2 = gram.project(&h2, &[]).unwrap();
        let m1 = gram.moments(&h1, &[]).unwrap();
        let m2 = gram.moments(&h2, &[]).unwrap();
        let lhs: f64 = p1.coeffs.iter().zip(&m2).map(|(a, b)| a * b).sum();
        let rhs: f64 = p2.coeffs.iter().zip(&m1).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0));
    }
}

#[test]
fn projection_of_square_matches_normal_equations() {
    let part = random_partition(&mut rng(35), false, 2, 9);
    let basis = Arc::new(SplineBasis::new(part.clone()));
    let gram = build_gram(basis.clone()).unwrap();
    let pf = gram.project(&|x| x * x, &[]).unwrap();
    let mut rhs = DVector::zeros(basis.dim());
    for w in part.breakpoints().windows(2) {
        if w[1] > w[0] {
            quadrature::for_each_node(w[0], w[1], 10, |x, wt| {
                let v = basis.eval_all(x).unwrap();
                for i in 0..v.len() {
                    rhs[i] += wt * x * x * v[i];
                }
            });
        }
    }
    let want = oracle_gram(&basis).lu().solve(&rhs).unwrap();
    for (a, b) in pf.coeffs.iter().zip(want.iter()) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn projection_norm_bounded_on_dyadic_hats() {
    let mut norms = Vec::new();
    for n in [2, 4, 8, 16, 32, 64, 128] {
        let part = dyadic(Domain::Interval, 2, n).partition().unwrap();
        let gram = build_gram(Arc::new(SplineBasis::new(part))).unwrap();
        norms.push(gram.projection_infinity_norm(16));
    }
    // the L-infinity norm of the piecewise linear projection is at most 3
    assert!(norms.iter().all(|&v| (1.0..=3.0).contains(&v)), "{norms:?}");
}

#[test]
fn decay_fit_is_stable_in_n() {
    for periodic in [false, true] {
        let domain = if periodic {
            Domain::Torus
        } else {
            Domain::Interval
        };
        let mut qs = Vec::new();
        for n in [50, 200, 800] {
            let seq = random_sequence(&mut rng(36), domain, 3, n, false);
            let gram = build_gram(Arc::new(SplineBasis::new(seq.partition().unwrap()))).unwrap();
            let fit = gram.fit_decay();
            assert!(fit.accepted());
            qs.push(fit.q);
        }
        let mean = qs.iter().sum::<f64>() / 3.0;
        assert!(
            qs.iter().all(|q| (q - mean).abs() <= 0.2 * mean),
            "{periodic} {qs:?}"
        );
    }
}

#[test]
fn tiny_cluster_gram_scales_exactly() {
    // the same knot pattern at width 2^-30 and at width 2^-3 (all knots
    // exact): Gram entries of B-splines inside the cluster scale by the
    // width ratio
    let u = [0.0, 9.0, 19.0, 20.0, 35.0, 45.0, 59.0, 64.0].map(|v| v / 64.0);
    let (h0, h1) = (2f64.powi(-30), 0.125);
    let k = 3;
    let grams: Vec<_> = [(0.5, h0), (0.25, h1)]
        .iter()
        .map(|&(c, h)| {
            let mut pts = vec![0.2];
            pts.extend(u.iter().map(|t| c + h * t));
            pts.push(0.9);
            let p = orthospline::Partition::clamped(k, &pts).unwrap();
            build_gram(Arc::new(SplineBasis::new(p))).unwrap()
        })
        .collect();
    // indices 1..=u.len()-k have their whole support in the cluster
    for i in 1..=(u.len() - k) as isize {
        for j in i..=(u.len() - k) as isize {
            let a = grams[0].entry(i, j) / h0;
            let b = grams[1].entry(i, j) / h1;
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-3), "({i},{j}) {a} {b}");
        }
    }
}
