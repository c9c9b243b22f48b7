use std::process::{Command, Output};

use loopfock::suites::Report;
use loopfock_cli::CSV_HEADER;

fn loopfock(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loopfock")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const FAST: &str = "levels,chevalley,snf,intertwine,hecke";

#[test]
fn empty_suite_list_is_a_config_error() {
    for args in [&["verify"][..], &["verify", "--suite", ""]] {
        let o = loopfock(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn invalid_values_are_config_errors() {
    let o = loopfock(&["verify", "--suite", "snf", "--depth", "1", "--window", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("depth"));
    assert_eq!(loopfock(&["verify", "--suite", "snf", "--model", "tensor"]).status.code(), Some(2));
}

#[test]
fn json_report_round_trips_and_matches_schema() {
    let o = loopfock(&["verify", "--suite", FAST, "--probes", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let report: Report = serde_json::from_str(&text).unwrap();
    assert!(report.all_passed());
    assert_eq!(report.params.probes, 6);
    assert_eq!(serde_json::to_string_pretty(&report).unwrap() + "\n", text);

    let schema: serde_json::Value =
        serde_json::from_str(include_str!("../../../docs/report.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let instance: serde_json::Value = serde_json::from_str(&text).unwrap();
    let errors: Vec<String> = validator.iter_errors(&instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
}

#[test]
fn csv_has_header_and_one_row_per_case() {
    let json = stdout(&loopfock(&["verify", "--suite", FAST]));
    let report: Report = serde_json::from_str(&json).unwrap();
    let csv = stdout(&loopfock(&["verify", "--suite", FAST, "--format", "csv"]));
    let mut r = csv::Reader::from_reader(csv.as_bytes());
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER);
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), report.cases.len());
    for (row, case) in rows.iter().zip(&report.cases) {
        assert_eq!((&row[0], &row[1]), (case.suite.name(), case.id.as_str()));
    }
}

#[test]
fn identical_configs_give_identical_bytes() {
    let args = ["verify", "--suite", "brackets,whittaker,intertwine,hecke", "--seed", "7"];
    let a = loopfock(&args);
    let b = loopfock(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn text_lists_weights_and_levels() {
    let o = loopfock(&["verify", "--suite", "levels", "--n", "3", "--format", "text"]);
    assert_eq!(o.status.code(), Some(0));
    let t = stdout(&o);
    assert!(t.contains("highest weights"));
    // the k = u rows carry -1
    for k in 1..=2 {
        assert!(t.lines().any(|l| l.split_whitespace().collect::<Vec<_>>() == [&k.to_string(), &k.to_string(), "-1", "-1"]));
    }
    assert!(t.contains("measured levels"));
    assert!(t.lines().any(|l| l.starts_with("single") && l.trim_end().ends_with("1")));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"suites": ["snf"], "n": 3, "seed": 4, "format": "json"}"#).unwrap();
    let out = dir.path().join("report.json");
    let o = loopfock(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "11",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let report: Report = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!((report.params.n, report.params.seed), (3, 11));

    std::fs::write(&cfg, "{\n  \"suites\": [\"snf\"],\n  \"windw\": 3\n}").unwrap();
    let o = loopfock(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("windw") && err.contains("line 3"), "{err}");
}

#[test]
fn compute_tables() {
    let w: serde_json::Value = serde_json::from_str(&stdout(&loopfock(&["compute", "weights", "--n", "3"]))).unwrap();
    assert_eq!(w.as_array().unwrap().len(), 6);
    let csv = stdout(&loopfock(&["compute", "cocycles", "--format", "csv", "--count", "4"]));
    let mut r = csv::Reader::from_reader(csv.as_bytes());
    for row in r.records().map(Result::unwrap) {
        assert_eq!(&row[2], &row[3], "scalar vs |det u(0)|^k");
    }
    let levels = stdout(&loopfock(&["compute", "levels", "--model", "matrix", "--format", "csv"]));
    assert_eq!(levels.lines().count(), 9);
}

#[test]
fn decompose_reads_stdin() {
    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_loopfock"))
        .args(["decompose", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(br#"{"n": 2, "T": null, "entries": [[[[1, "1"]], [[0, "1"]]], [[], [[2, "3"]]]]}"#)
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["k"], serde_json::json!([0, 3]));
    assert_eq!(v["quotient_dim"], serde_json::json!(3));
    assert_eq!(loopfock(&["decompose", "/nonexistent.json"]).status.code(), Some(2));
}
