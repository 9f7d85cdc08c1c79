#![allow(dead_code)]

use orthospline::{Domain, KnotSequence, Partition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random admissible sequence; with `repeat` some points get extra copies.
pub fn random_sequence(
    rng: &mut ChaCha8Rng,
    domain: Domain,
    k: usize,
    n: usize,
    repeat: bool,
) -> KnotSequence {
    let mut seq = KnotSequence::new(domain, k).unwrap();
    while seq.len() < n {
        let x: f64 = match domain {
            Domain::Interval => rng.gen_range(1e-6..1.0 - 1e-6),
            Domain::Torus => rng.gen_range(0.0..1.0),
        };
        let copies = if repeat { rng.gen_range(1..=k) } else { 1 };
        for _ in 0..copies {
            if seq.len() < n {
                let _ = seq.push(x);
            }
        }
    }
    seq
}

pub fn dyadic(domain: Domain, k: usize, n: usize) -> KnotSequence {
    let mut seq = KnotSequence::new(domain, k).unwrap();
    let mut level = 1u32;
    'outer: loop {
        let den = 1u64 << level;
        for num in (1..den).step_by(2) {
            if seq.len() == n {
                break 'outer;
            }
            seq.push(num as f64 / den as f64).unwrap();
        }
        level += 1;
    }
    seq
}

pub fn random_partition(rng: &mut ChaCha8Rng, periodic: bool, k: usize, n: usize) -> Partition {
    let domain = if periodic {
        Domain::Torus
    } else {
        Domain::Interval
    };
    random_sequence(rng, domain, k, n, false)
        .partition()
        .unwrap()
}

/// Proptest settings without regression files.
pub fn config(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        failure_persistence: None,
        ..proptest::test_runner::Config::with_cases(cases)
    }
}
