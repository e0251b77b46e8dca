//! End-to-end runs of the `adaptive-otr` binary on temporary files.

use std::path::Path;
use std::process::{Command, Output};

use adaptive_otr::cli::{write_dataset, CsvSchema, EstimateReport, TuneReport};
use adaptive_otr::sim::{generate_scenario, McReport, ScenarioId, ScenarioSpec};
use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adaptive-otr")).args(args).output().expect("binary runs")
}

fn write_scenario(dir: &Path, id: ScenarioId, n: usize) -> String {
    let ds = generate_scenario(&ScenarioSpec::get(id), n, 11).unwrap().into_dataset();
    let path = dir.join(format!("{id}.csv"));
    let mut f = std::fs::File::create(&path).unwrap();
    write_dataset(&mut f, &ds, &CsvSchema::new(vec!["x1".into(), "x2".into()], "a", "y")).unwrap();
    path.display().to_string()
}

fn estimate(path: &str, extra: &[&str]) -> EstimateReport {
    let mut args = vec!["estimate", "--data", path, "--x-cols", "x1,x2", "--a-col", "a", "--y-col", "y", "--repeats", "3"];
    args.extend_from_slice(extra);
    let out = bin(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_code(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).expect("JSON error on stderr");
    assert_eq!(v["schema_version"], 1);
    assert!(v["error"]["message"].as_str().is_some_and(|m| !m.is_empty()));
    v["error"]["code"].as_str().unwrap().to_string()
}

#[test]
fn estimate_report_is_complete_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), ScenarioId::A, 1000);
    let args = ["estimate", "--data", &path, "--x-cols", "x1,x2", "--a-col", "a", "--y-col", "y", "--seed", "5"];
    let (a, b) = (bin(&args), bin(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "same seed, same bytes");

    let r: EstimateReport = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(r.schema_version, 1);
    assert_eq!(r.n, 1000);
    assert_eq!(r.seed, 5);
    assert_eq!(r.config.repeats, 10);
    assert!(r.ci_low < r.estimate && r.estimate < r.ci_high);
    assert!((r.ci_length - (r.ci_high - r.ci_low)).abs() < 1e-12);
    assert!(r.sigma > 0.0);
    // the truth is 0.6, and the interval is short at n = 1000
    assert!((r.estimate - 0.6).abs() < 0.15 && r.ci_length < 0.2, "{r:?}");
}

#[test]
fn smaller_confidence_level_narrows_the_interval() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), ScenarioId::B, 600);
    let wide = estimate(&path, &["--alpha", "0.05"]);
    let narrow = estimate(&path, &["--alpha", "0.10"]);
    assert_eq!(wide.estimate, narrow.estimate);
    assert!(narrow.ci_length < wide.ci_length);
}

#[test]
fn comparison_methods_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), ScenarioId::A, 800);
    let r = estimate(&path, &["--method", "sss,plugin"]);
    let names: Vec<&str> = r.comparisons.iter().map(|c| c.method.as_str()).collect();
    assert_eq!(names.len(), 2);
    let sss = &r.comparisons[0];
    assert_eq!(sss.n, 400);
    assert!(sss.ci_length > r.ci_length);
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), ScenarioId::A, 400);
    let out = dir.path().join("report.json");
    let base = ["estimate", "--data", &path, "--x-cols", "x1,x2", "--a-col", "a", "--y-col", "y", "--repeats", "2"];
    let to_stdout = bin(&base);
    let mut with_file = base.to_vec();
    with_file.extend_from_slice(&["--output", out.to_str().unwrap()]);
    let to_file = bin(&with_file);
    assert!(to_file.status.success() && to_file.stdout.is_empty());
    let a: EstimateReport = serde_json::from_slice(&to_stdout.stdout).unwrap();
    let b: EstimateReport = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn tune_reports_both_halves_and_scales_with_c() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), ScenarioId::D, 1000);
    let tune = |c: &str| -> TuneReport {
        let out = bin(&["tune", "--data", &path, "--x-cols", "x1,x2", "--a-col", "a", "--y-col", "y", "--C", c]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        serde_json::from_slice(&out.stdout).unwrap()
    };
    let (lo, hi) = (tune("0.01"), tune("0.05"));
    for t in [&lo, &hi] {
        assert!(t.eae_1.unwrap() >= 0.0 && t.eae_2.unwrap() >= 0.0);
        assert!(t.h_1 > 0.0 && t.h_2 > 0.0);
    }
    assert_eq!(lo.eae_1, hi.eae_1, "C only enters the bandwidth");
    assert!(hi.h_1 > lo.h_1 && hi.h_2 > lo.h_2);
}

#[test]
fn simulate_round_trips_through_json() {
    let out = bin(&["simulate", "--scenario", "A", "--n", "300", "--reps", "4", "--methods", "adaptive,sss,oracle", "--seed", "9"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: McReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r.reps, 4);
    assert_eq!(r.methods.len(), 3);
    assert_eq!(r.to_json().unwrap().trim(), String::from_utf8(out.stdout).unwrap().trim());
}

#[test]
fn simulate_csv_and_toy_run() {
    let out = bin(&["simulate", "--scenario", "E", "--n", "400", "--reps", "1", "--methods", "adaptive,sss,subbagging", "--subbagging-b", "5", "--format", "csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    let toy = bin(&["toy", "--n", "100", "--reps", "20"]);
    assert!(toy.status.success());
    assert_eq!(String::from_utf8(toy.stdout).unwrap().lines().count(), 3);
}

#[test]
fn bad_inputs_fail_with_error_objects() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), ScenarioId::A, 200);

    let out = bin(&["estimate", "--data", &path, "--x-cols", "x1,zz", "--a-col", "a", "--y-col", "y"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_code(&out), "csv");

    let missing = dir.path().join("nope.csv");
    let out = bin(&["estimate", "--data", missing.to_str().unwrap(), "--x-cols", "x1", "--a-col", "a", "--y-col", "y"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    error_code(&out);

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x1,a,y\n0,1,0.5\n1,2,0.1\n").unwrap();
    let out = bin(&["tune", "--data", bad.to_str().unwrap(), "--x-cols", "x1", "--a-col", "a", "--y-col", "y"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(v["error"]["message"].as_str().unwrap().contains("row 2"), "{v}");

    let out = bin(&["simulate", "--scenario", "Z", "--reps", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_code(&out), "unknown_scenario");

    let out = bin(&["simulate", "--scenario", "A", "--reps", "1", "--methods", "bogus"]);
    assert_eq!(error_code(&out), "unknown_method");

    let out = bin(&["estimate"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_code(&out), "usage");

    assert_eq!(bin(&["--help"]).status.code(), Some(0));
}

#[test]
fn too_small_dataset_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.csv");
    std::fs::write(&path, "x1,x2,a,y\n0,0,0,0.1\n0,1,1,0.2\n1,0,0,0.3\n1,1,1,0.4\n0,0,1,0.5\n1,1,0,0.6\n0,1,0,0.7\n").unwrap();
    let path = path.display().to_string();
    let out = bin(&["estimate", "--data", &path, "--x-cols", "x1,x2", "--a-col", "a", "--y-col", "y"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_code(&out), "insufficient_sample");
}
