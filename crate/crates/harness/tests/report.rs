use orthospline_harness::checks;
use orthospline_harness::config::ExperimentConfig;
use orthospline_harness::experiment::run_checks;
use orthospline_harness::report::{
    emit, load_meta, render, CheckRecord, Fit, Format, Measure, Status, Table, Tier,
    VerificationReport, SUMMARY_COLUMNS,
};

fn small() -> ExperimentConfig {
    ExperimentConfig {
        n: 16,
        trials: 10,
        ..ExperimentConfig::default()
    }
}

fn sample_record(name: &str) -> CheckRecord {
    let mut detail = Table::new(&["x", "y"]);
    detail.push(vec!["1".into(), "a,b".into()]);
    CheckRecord {
        name: name.into(),
        tier: Tier::Tracked,
        status: Status::Recorded,
        value: Some(0.1 + 0.2),
        fit: Some(Fit { c: 3.5, q: 1.0 / 3.0 }),
        measured: vec![
            Measure {
                name: "m".into(),
                value: Some(f64::MIN_POSITIVE),
            },
            Measure {
                name: "missing".into(),
                value: None,
            },
        ],
        detail,
    }
}

#[test]
fn empty_report_is_header_only() {
    let r = VerificationReport::new(&small());
    let csv = r.summary_csv().unwrap();
    assert_eq!(csv, format!("{}\n", SUMMARY_COLUMNS.join(",")));
}

#[test]
fn json_round_trip_reproduces_report() {
    let mut r = VerificationReport::new(&small());
    r.push(sample_record("a")).unwrap();
    r.push(sample_record("b")).unwrap();
    let back = VerificationReport::from_json(&r.to_json()).unwrap();
    assert_eq!(back, r);

    let run = run_checks(&small(), &checks::registry()).unwrap();
    let back = VerificationReport::from_json(&render(&run, Format::Json).unwrap()).unwrap();
    assert_eq!(back, run);
}

#[test]
fn duplicate_check_is_refused() {
    let mut r = VerificationReport::new(&small());
    r.push(sample_record("a")).unwrap();
    assert!(r.push(sample_record("a")).is_err());
}

#[test]
fn csv_rows_match_schema() {
    let run = run_checks(&small(), &checks::registry()).unwrap();
    let csv = run.summary_csv().unwrap();
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, SUMMARY_COLUMNS);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), checks::names().len());
    for row in &rows {
        assert_eq!(row.len(), SUMMARY_COLUMNS.len());
        assert!(matches!(&row[3], "pass" | "fail" | "recorded"), "{row:?}");
    }
}

#[test]
fn every_check_appears_once() {
    let run = run_checks(&small(), &checks::registry()).unwrap();
    let names: Vec<&str> = run.checks.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(names, checks::names());
}

#[test]
fn emitted_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small();
    let run = run_checks(&cfg, &checks::registry()).unwrap();
    emit(&run, &cfg, dir.path()).unwrap();
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary, run.summary_csv().unwrap());
    for c in &run.checks {
        let path = dir.path().join("checks").join(format!("{}.csv", c.name));
        let text = std::fs::read_to_string(&path).unwrap();
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(reader.headers().unwrap().len(), c.detail.columns.len());
        assert_eq!(reader.records().count(), c.detail.rows.len());
    }
    let meta = load_meta(dir.path()).unwrap();
    assert_eq!(meta.report, run);
    assert_eq!(meta.config, cfg);
}

#[test]
fn unwritable_path_is_an_error() {
    let file = tempfile::NamedTempFile::new().unwrap();
    let cfg = small();
    let r = VerificationReport::new(&cfg);
    assert!(emit(&r, &cfg, &file.path().join("sub")).is_err());
}
