mod common;

use common::*;
use orthospline::charint::{
    count_large_nested, distance_count, minimal_enclosure, nested_decay_ratio,
};
use orthospline::ortho::alpha_closed_form;
use orthospline::{build_system, characteristic_interval, CharInterval, Domain, Partition, Seg};
use proptest::prelude::*;
use rand::Rng;

fn intervals(seq: &orthospline::KnotSequence) -> Vec<CharInterval> {
    build_system(seq)
        .unwrap()
        .functions
        .into_iter()
        .filter_map(|f| f.j)
        .collect()
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn intervals_are_nested_or_disjoint(seed: u64, k in 1usize..=4, periodic: bool, repeat: bool) {
        let domain = if periodic { Domain::Torus } else { Domain::Interval };
        let seq = random_sequence(&mut rng(seed), domain, k, 40, repeat);
        let js = intervals(&seq);
        for a in &js {
            prop_assert!(a.len() > 0.0);
            for b in &js {
                prop_assert!(!a.j.overlaps(&b.j) || a.j.contains(&b.j) || b.j.contains(&a.j));
            }
        }
    }

    #[test]
    fn characteristic_interval_membership(seed: u64, k in 1usize..=5, periodic: bool) {
        let mut r = rng(seed);
        let n = if periodic { 2 * k + r.gen_range(0..6) } else { r.gen_range(1..12) };
        let p = random_partition(&mut r, periodic, k, n);
        let i0 = r.gen_range(0..n) as isize;
        let alpha = alpha_closed_form(&p, i0).unwrap();
        let ci = characteristic_interval(&p, i0, &alpha).unwrap();
        let k = k as isize;
        let a = |j: isize| alpha[(j - (i0 - k)) as usize].abs();
        let width = |j: isize| p.tau(j + k) - p.tau(j);
        let min_w = (i0 - k..=i0).map(width).fold(f64::INFINITY, f64::min);
        let lambda0: Vec<isize> = (i0 - k..=i0).filter(|&j| width(j) <= 2.0 * min_w).collect();
        let max = lambda0.iter().map(|&j| a(j)).fold(0.0, f64::max);
        // j0 has nearly minimal support and the largest coefficient there
        prop_assert!(lambda0.contains(&ci.j0));
        prop_assert!(a(ci.j0) >= max * (1.0 - 1e-12));
        prop_assert!(ci.hull.contains(&ci.j));
        // J is a longest grid interval inside the support of N_{j0}
        for l in ci.j0..ci.j0 + k {
            prop_assert!(p.tau(l + 1) - p.tau(l) <= ci.j.len());
        }
    }
}

#[test]
fn large_nested_count_does_not_grow() {
    let count = |seq: &orthospline::KnotSequence, len: usize| {
        let js = intervals(&seq.prefix(len));
        js.iter()
            .map(|v| count_large_nested(&js, &v.j, 0.25).unwrap())
            .max()
            .unwrap()
    };
    for k in 1..=3 {
        for domain in [Domain::Interval, Domain::Torus] {
            let seq = dyadic(domain, k, 400);
            assert_eq!(count(&seq, 40), count(&seq, 400), "k={k} {domain:?}");
            // random sequences: the running max creeps up slowly as more
            // intervals are sampled, but stays under a k-dependent bound
            let seq = random_sequence(&mut rng(41), domain, k, 400, false);
            let (small, large) = (count(&seq, 40), count(&seq, 400));
            assert!(
                large <= 2 * small && large <= 4 * k + 2,
                "k={k} {domain:?}: {small} -> {large}"
            );
        }
    }
}

// decreasing chain of intervals around x, one entry per strict decrease
fn chain_at(js: &[CharInterval], x: f64) -> Vec<CharInterval> {
    let mut out: Vec<CharInterval> = Vec::new();
    for j in js {
        if j.j.contains_point(x)
            && out
                .last()
                .is_none_or(|l| l.j.contains(&j.j) && j.len() < l.len())
        {
            out.push(j.clone());
        }
    }
    out
}

#[test]
fn nested_chains_decay_geometrically() {
    for k in 1..=3 {
        for domain in [Domain::Interval, Domain::Torus] {
            let js = intervals(&dyadic(domain, k, 255));
            for x in [0.3, 0.61, 0.9] {
                let fit = nested_decay_ratio(&chain_at(&js, x)).unwrap().unwrap();
                assert!(fit.kappa < 1.0, "k={k} x={x}");
            }
            if domain == Domain::Interval {
                // the chain at the left end halves at every dyadic level
                let fit = nested_decay_ratio(&chain_at(&js, 1e-6)).unwrap().unwrap();
                assert!((fit.kappa - 0.5).abs() < 1e-12, "k={k} kappa={}", fit.kappa);
            }
        }
    }
    let js = intervals(&random_sequence(&mut rng(42), Domain::Torus, 2, 300, false));
    let fit = nested_decay_ratio(&chain_at(&js, 0.37)).unwrap().unwrap();
    assert!(fit.kappa < 1.0);
}

fn all_arcs(p: &Partition) -> Vec<Seg> {
    let pts = p.knots();
    let mut out = Vec::new();
    for &a in pts {
        for &e in pts {
            if a != e {
                out.push(Seg::arc(a, e));
            }
        }
    }
    out
}

#[test]
fn minimal_enclosure_matches_exhaustive_search() {
    let mut r = rng(43);
    for case in 0..60 {
        let k = 1 + case % 3;
        let n = r.gen_range(2 * k + 1..=16);
        let p = random_partition(&mut r, true, k, n);
        let i0 = r.gen_range(0..n) as isize;
        let j = characteristic_interval(&p, i0, &alpha_closed_form(&p, i0).unwrap()).unwrap();
        for ell in 0..n as isize {
            let cell = Seg::arc(p.knots()[ell as usize], p.knots()[(ell as usize + 1) % n]);
            let best = all_arcs(&p)
                .into_iter()
                .filter(|c| c.contains(&j.j) && c.contains(&cell))
                .map(|c| c.len())
                .fold(f64::INFINITY, f64::min);
            let got = minimal_enclosure(&p, &j, ell).unwrap();
            assert!(got.c.contains(&j.j) && got.c.contains(&cell));
            assert_eq!(got.c.len(), best, "case {case} ell {ell}");
        }
    }
}

// counts extended knots tau_i between z and J by walking the index range
fn clamped_scan(p: &Partition, z: f64, j: &Seg) -> usize {
    if j.contains_point(z) {
        return 0;
    }
    let k = p.k() as isize;
    let (lo, hi) = if z > j.e { (j.e, z) } else { (z, j.a) };
    (-k..p.n() as isize + k)
        .filter(|&i| (lo..=hi).contains(&p.tau(i)))
        .count()
}

// unrolled periodic scan: grow an arc from J towards x on each side,
// keep the side whose enclosing arc is shorter
fn periodic_scan(p: &Partition, z: f64, j: &Seg) -> usize {
    if j.contains_point(z) {
        return 0;
    }
    let n = p.n() as isize;
    let unrolled: Vec<f64> = (-2 * n..3 * n).map(|i| p.tau(i)).collect();
    let ja = j.a;
    let je = ja + j.len();
    let cell_lo = p
        .knots()
        .iter()
        .rev()
        .find(|&&t| t <= z)
        .copied()
        .unwrap_or(p.knots()[n as usize - 1] - 1.0);
    let cell_hi = p.tau(p.knots().partition_point(|&t| t <= z) as isize);
    // right side: z beyond je
    let zr = {
        let mut v = z;
        while v < je {
            v += 1.0;
        }
        while v - 1.0 >= je {
            v -= 1.0;
        }
        v
    };
    let right_len = cell_hi + (zr - z) - ja;
    // left side: z before ja
    let zl = {
        let mut v = z;
        while v > ja {
            v -= 1.0;
        }
        while v + 1.0 <= ja {
            v += 1.0;
        }
        v
    };
    let left_len = je - (cell_lo + (zl - z));
    let count = |lo: f64, hi: f64| unrolled.iter().filter(|&&t| t >= lo && t <= hi).count();
    let right_a = ja.rem_euclid(1.0);
    let left_a = (cell_lo + (zl - z)).rem_euclid(1.0);
    if right_len < left_len || (right_len == left_len && right_a <= left_a) {
        count(je, zr)
    } else {
        count(zl, ja)
    }
}

#[test]
fn distance_count_matches_scans() {
    let mut r = rng(44);
    for case in 0..100 {
        let periodic = case % 2 == 1;
        let k = 1 + case % 4;
        let n = if periodic {
            r.gen_range(2 * k..3 * k + 8)
        } else {
            r.gen_range(1..20)
        };
        let p = random_partition(&mut r, periodic, k, n);
        let i0 = r.gen_range(0..n) as isize;
        let j = characteristic_interval(&p, i0, &alpha_closed_form(&p, i0).unwrap()).unwrap();
        let mut zs: Vec<f64> = (0..40).map(|_| r.gen_range(0.0..1.0)).collect();
        zs.extend(p.knots().iter().copied().filter(|&t| t < 1.0));
        for z in zs {
            let got = distance_count(&p, z, &j).unwrap();
            let want = if periodic {
                periodic_scan(&p, z, &j.j)
            } else {
                clamped_scan(&p, z, &j.j)
            };
            assert_eq!(got, want, "case {case} z={z} J={:?}", j.j);
        }
    }
}
