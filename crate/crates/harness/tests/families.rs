use std::collections::HashMap;
use std::io::Write;

use orthospline::Domain;
use orthospline_harness::config::ExperimentConfig;
use orthospline_harness::families::{self, family_for, generate_points, generate_sequence};

fn points(family: &str, k: usize, n: usize, seed: u64) -> Vec<f64> {
    let cfg = ExperimentConfig {
        family: family.into(),
        ..ExperimentConfig::default()
    };
    let fam = family_for(&cfg).unwrap();
    generate_points(fam.as_ref(), k, n, seed).unwrap()
}

#[test]
fn dyadic_starts_in_level_order() {
    assert_eq!(points("dyadic", 2, 3, 0), vec![0.5, 0.25, 0.75]);
    assert_eq!(
        points("dyadic", 1, 7, 9),
        vec![0.5, 0.25, 0.75, 0.125, 0.375, 0.625, 0.875]
    );
}

#[test]
fn repeated_knot_respects_multiplicity() {
    for seed in 0..20 {
        let pts = points("repeated-knot", 2, 200, seed);
        let mut counts: HashMap<u64, usize> = HashMap::new();
        for x in &pts {
            *counts.entry(x.to_bits()).or_default() += 1;
        }
        assert!(counts.values().all(|&c| c <= 2), "seed {seed}");
        assert!(counts.values().any(|&c| c == 2), "seed {seed}");
    }
}

#[test]
fn fixed_seed_is_byte_identical() {
    for name in ["dyadic", "uniform-random", "clustered", "repeated-knot"] {
        let a = points(name, 3, 150, 42);
        let b = points(name, 3, 150, 42);
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b), "{name}");
        assert_eq!(a.len(), 150);
        assert!(a.iter().all(|&x| x > 0.0 && x < 1.0), "{name}");
    }
    assert_ne!(points("uniform-random", 3, 20, 1), points("uniform-random", 3, 20, 2));
}

#[test]
fn every_family_gives_admissible_sequences() {
    for name in ["dyadic", "uniform-random", "clustered", "repeated-knot"] {
        for k in 1..=6 {
            for domain in [Domain::Interval, Domain::Torus] {
                let seq = generate_sequence(name, 40, 5, k, domain).unwrap();
                assert_eq!(seq.len(), 40, "{name} k={k}");
            }
        }
    }
}

#[test]
fn clustered_points_accumulate() {
    let pts = points("clustered", 2, 200, 3);
    let mut sorted = pts.clone();
    sorted.sort_by(f64::total_cmp);
    let smallest_gap = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&g| g > 0.0)
        .fold(f64::INFINITY, f64::min);
    assert!(smallest_gap < 1e-4, "gap {smallest_gap}");
}

#[test]
fn custom_file_reads_points() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "# hand picked\n0.5, 0.25\n0.75 0.5\n0.125").unwrap();
    let cfg = ExperimentConfig {
        family: "custom-file".into(),
        sequence_file: Some(file.path().to_path_buf()),
        ..ExperimentConfig::default()
    };
    let fam = family_for(&cfg).unwrap();
    let pts = generate_points(fam.as_ref(), 2, 5, 0).unwrap();
    assert_eq!(pts, vec![0.5, 0.25, 0.75, 0.5, 0.125]);
    assert!(generate_points(fam.as_ref(), 1, 5, 0).is_err());
    assert!(generate_points(fam.as_ref(), 2, 6, 0).is_err());
}

#[test]
fn unknown_family_is_rejected() {
    let cfg = ExperimentConfig {
        family: "fibonacci".into(),
        ..ExperimentConfig::default()
    };
    assert!(family_for(&cfg).is_err());
    assert!(!families::is_registered("fibonacci"));
    assert_eq!(
        families::names(),
        vec!["clustered", "custom-file", "dyadic", "repeated-knot", "uniform-random"]
    );
}
