use orthospline_harness::config::{parse_p_list, ExperimentConfig, MAX_K, MAX_N};
use proptest::prelude::*;

fn valid_config() -> impl Strategy<Value = ExperimentConfig> {
    (
        1usize..=MAX_K,
        prop::sample::select(vec!["dyadic", "uniform-random", "clustered", "repeated-knot"]),
        0usize..=MAX_N,
        prop::collection::vec(1.0001f64..50.0, 1..5),
        any::<u64>(),
        1usize..500,
        1usize..=64,
        prop::option::of(1usize..100),
    )
        .prop_map(|(k, family, n, p_list, seed, trials, m, nk)| ExperimentConfig {
            k,
            family: family.into(),
            n: n.max(2 * k + 2),
            p_list,
            seed,
            trials,
            m,
            n_k_override: nk,
            output_dir: format!("runs/{seed}").into(),
            sequence_file: None,
        })
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(256) })]

    #[test]
    fn text_round_trip(cfg in valid_config()) {
        prop_assert!(cfg.validate().is_ok());
        let back = ExperimentConfig::parse(&cfg.to_text()).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.experiment_id(), cfg.experiment_id());
    }

    #[test]
    fn invalid_exponents_are_rejected(cfg in valid_config(), p in prop::sample::select(vec![1.0, 0.5, -2.0, f64::INFINITY])) {
        let mut bad = cfg;
        bad.p_list.push(p);
        prop_assert!(bad.validate().is_err());
    }

    #[test]
    fn short_periodic_sequences_are_rejected(k in 1usize..=MAX_K, short in 0usize..14) {
        let cfg = ExperimentConfig { k, n: short.min(2 * k + 1), ..ExperimentConfig::default() };
        prop_assert!(cfg.validate().is_err());
    }
}

#[test]
fn parse_reports_line_problems() {
    assert!(ExperimentConfig::parse("k = 2\nk = 3\n").is_err());
    assert!(ExperimentConfig::parse("colour = blue\n").is_err());
    assert!(ExperimentConfig::parse("just words\n").is_err());
    assert!(ExperimentConfig::parse("n = many\n").is_err());
    assert!(ExperimentConfig::parse("trials = 0\n").is_err());
    assert!(ExperimentConfig::parse("m = 65\n").is_err());
    assert!(ExperimentConfig::parse("n = 2001\n").is_err());
    assert!(ExperimentConfig::parse("k = 7\nn = 100\n").is_err());
    assert!(ExperimentConfig::parse("family = custom-file\n").is_err());
    assert!(ExperimentConfig::parse("N_k_override = 0\n").is_err());
    let cfg = ExperimentConfig::parse("# comment\n\nk=3 # trailing\nN_k_override = 9\n").unwrap();
    assert_eq!((cfg.k, cfg.n_k()), (3, 9));
}

#[test]
fn p_list_accepts_commas_and_spaces() {
    assert_eq!(parse_p_list("1.25, 1.5 3,4").unwrap(), vec![1.25, 1.5, 3.0, 4.0]);
    assert!(parse_p_list("1.5, x").is_err());
}

#[test]
fn override_changes_experiment_id() {
    let a = ExperimentConfig::default();
    let b = ExperimentConfig { n_k_override: Some(5), ..a.clone() };
    assert_ne!(a.experiment_id(), b.experiment_id());
}
