mod common;

use common::*;
use orthospline::knots::cyclic_distance;
use orthospline::{maximal_splitting, Domain, KnotSequence};
use proptest::prelude::*;

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn splitting_cuts_a_largest_gap(seed: u64, k in 1usize..=4, n in 2usize..40) {
        let p = random_partition(&mut rng(seed), true, k, n);
        let s = maximal_splitting(&p).unwrap();
        let pts = p.interior();
        let largest = (0..n)
            .map(|m| if m == 0 { pts[0] + 1.0 - pts[n - 1] } else { pts[m] - pts[m - 1] })
            .fold(0.0, f64::max);
        let rot = s.periodic.interior();
        // the wrap gap of the rotated points is the cut gap
        prop_assert!((rot[0] + 1.0 - rot[n - 1] - largest).abs() < 1e-12);
        prop_assert!((rot[0] - (1.0 - rot[n - 1])).abs() < 1e-12);
        prop_assert_eq!(s.clamped.interior(), rot);
        for i in 0..n {
            let j = s.map_index(i as isize) as usize;
            prop_assert!((s.map_point(pts[i]) - rot[j]).abs() < 1e-15);
        }
    }

    #[test]
    fn text_round_trip(seed: u64, k in 1usize..=6, n in 0usize..30, periodic: bool, repeat: bool) {
        let domain = if periodic { Domain::Torus } else { Domain::Interval };
        let seq = random_sequence(&mut rng(seed), domain, k, n, repeat);
        let back = KnotSequence::from_text(&seq.to_text()).unwrap();
        prop_assert_eq!(back, seq);
    }

    #[test]
    fn multiplicity_is_capped(x in 0.001f64..0.999, k in 1usize..=6, periodic: bool) {
        let domain = if periodic { Domain::Torus } else { Domain::Interval };
        let mut seq = KnotSequence::new(domain, k).unwrap();
        for _ in 0..k {
            prop_assert!(seq.push(x).is_ok());
        }
        prop_assert!(seq.push(x).is_err());
        prop_assert_eq!(seq.len(), k);
    }

    #[test]
    fn cyclic_distance_is_a_metric(n in 1usize..50, i: i16, j: i16, l: i16) {
        let (i, j, l) = (i as isize, j as isize, l as isize);
        let d = |a, b| cyclic_distance(n, a, b);
        prop_assert_eq!(d(i, j), d(j, i));
        prop_assert!(d(i, j) <= n / 2);
        prop_assert!(d(i, l) <= d(i, j) + d(j, l));
        prop_assert_eq!(d(i, i + n as isize), 0);
    }
}
