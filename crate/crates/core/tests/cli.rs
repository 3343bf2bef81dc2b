use std::fs;
use std::path::Path;

use bergman_lab::builtin::list_builtin;
use bergman_lab::cli::{run, EXIT_FAIL, EXIT_INPUT, EXIT_PASS};
use bergman_lab::report::Report;
use bergman_lab::runner::RunOptions;

fn write_scenario(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_reader(csv.as_bytes());
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[idx].to_string()).collect()
}

#[test]
fn builtin_manifest() {
    let ids = list_builtin();
    assert!(ids.len() >= 8);
    for id in [
        "ball-gradnorm",
        "polydisc-gradnorm",
        "schwarz-suite",
        "equality-suite",
        "fisher-identity",
        "rep-map-suite",
        "annulus-trend",
        "suzuki-disc",
    ] {
        assert!(ids.contains(&id), "{id} missing");
    }
}

#[test]
fn ball_gradnorm_passes_with_small_deviation() {
    let out = tempfile::tempdir().unwrap();
    assert_eq!(run("ball-gradnorm", Some(out.path()), RunOptions::default()), EXIT_PASS);
    let csv = fs::read_to_string(out.path().join("report.csv")).unwrap();
    let dev: Vec<f64> = column(&csv, "deviation").iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(dev.len(), 200);
    assert!(dev.iter().all(|&d| d <= 1e-10));
}

#[test]
fn doubling_map_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(
        dir.path(),
        "double.json",
        r#"{
          "id": "double",
          "task": "schwarz",
          "source": {"kind": "disc"},
          "target": {"kind": "disc"},
          "map": {"components": [{"mul": [{"const": 2}, {"var": 0}]}]},
          "points": [0.1],
          "order": 6
        }"#,
    );
    assert_eq!(run(&path, Some(&dir.path().join("out")), RunOptions::default()), EXIT_INPUT);
    assert!(!dir.path().join("out").exists());
}

#[test]
fn malformed_and_unknown_inputs_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_scenario(dir.path(), "bad.json", "{\"id\": \"x\",\n \"task\": \"metric\",\n \"domian\": {}}");
    assert_eq!(run(&bad, Some(dir.path()), RunOptions::default()), EXIT_INPUT);
    assert_eq!(run("no-such-scenario", Some(dir.path()), RunOptions::default()), EXIT_INPUT);
}

#[test]
fn failed_check_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(
        dir.path(),
        "tight.json",
        r#"{"id": "tight", "task": "metric", "domain": {"kind": "disc"},
            "points": [0.3], "tolerances": {"metric_fd": 0}}"#,
    );
    assert_eq!(run(&path, Some(dir.path()), RunOptions::default()), EXIT_FAIL);
    let report = Report::from_json(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(!report.passed);
    assert_eq!(report.tolerances["metric_fd"], 0.0);
}

#[test]
fn strict_mode_fails_unconverged_moments() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(
        dir.path(),
        "coarse.json",
        r#"{"id": "coarse", "task": "statistics", "domain": {"kind": "disc"}, "order": 4,
            "points": [0.8],
            "tolerances": {"normalization": 1, "score_mean": 1, "fisher_rel": 1}}"#,
    );
    assert_eq!(run(&path, Some(&dir.path().join("a")), RunOptions::default()), EXIT_PASS);
    let strict = RunOptions {
        strict: true,
        ..Default::default()
    };
    assert_eq!(run(&path, Some(&dir.path().join("b")), strict), EXIT_FAIL);
}

#[test]
fn reruns_are_bit_identical_and_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["a", "b"] {
        assert_eq!(run("equality-suite", Some(&dir.path().join(sub)), RunOptions::default()), EXIT_PASS);
    }
    let csv_a = fs::read(dir.path().join("a/report.csv")).unwrap();
    let csv_b = fs::read(dir.path().join("b/report.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    let text = fs::read_to_string(dir.path().join("a/report.json")).unwrap();
    let report = Report::from_json(&text).unwrap();
    assert_eq!(report.to_json().unwrap(), text);
    assert_eq!(Report::from_json(&report.to_json().unwrap()).unwrap(), report);
    assert_eq!(report.to_csv().unwrap().as_bytes(), &csv_a[..]);
    let ids = column(&report.to_csv().unwrap(), "scenario_id");
    assert!(ids.iter().all(|s| s.starts_with("equality-suite:")));
}

#[test]
fn order_override_is_stamped() {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        order: Some(25),
        ..Default::default()
    };
    assert_eq!(run("fisher-identity", Some(dir.path()), opts), EXIT_PASS);
    let report = Report::from_json(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report.environment.order, Some(25));
}
