use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use metspace::rmf::write_field;
use metspace::{GridChart, MetricField, SpdMatrix};

fn metspace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metspace")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scaled_delta(dir: &Path, name: &str, c: f64) -> PathBuf {
    let chart = GridChart::uniform(2, 9, 0.0, 1.0).unwrap();
    let g = MetricField::constant(chart, SpdMatrix::scalar(2, c).unwrap()).unwrap();
    let p = dir.join(name);
    write_field(&g, &p).unwrap();
    p
}

#[test]
fn dl_of_delta_and_four_delta() {
    let dir = tempfile::tempdir().unwrap();
    let a = scaled_delta(dir.path(), "a.rmf", 1.0);
    let b = scaled_delta(dir.path(), "b.rmf", 4.0);
    let o = metspace(&["dl", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("value 0.693147  "), "{}", stdout(&o));

    let o = metspace(&["dl", a.to_str().unwrap(), b.to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "dl");
    assert!((v["results"][0]["value"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-15);
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);
    assert!(!v["anchors"].as_array().unwrap().is_empty());
}

#[test]
fn verify_metric_axioms_exits_zero() {
    let o = metspace(&["verify", "metric-axioms", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 3);
}

#[test]
fn construct_sturm_writes_the_pair() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sturm");
    let o = metspace(&["construct", "sturm", "--m-max", "8", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["sturm-g.rmf", "sturm-g-prime.rmf", "report.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(v["results"][0]["det_max_deviation"].as_f64().unwrap() <= 1e-14);
    assert_eq!(v["results"][0]["violations"], 0);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = ["construct", "graph", "--function", "random-creases", "--seed", "3", "--format", "csv", "--out", d];
    assert_eq!(metspace(&args).status.code(), Some(0));
    let first = std::fs::read(dir.path().join("report.csv")).unwrap();
    let field = std::fs::read(dir.path().join("graph-random-creases.rmf")).unwrap();
    assert_eq!(metspace(&args).status.code(), Some(0));
    assert_eq!(std::fs::read(dir.path().join("report.csv")).unwrap(), first);
    assert_eq!(std::fs::read(dir.path().join("graph-random-creases.rmf")).unwrap(), field);
    assert!(String::from_utf8(first).unwrap().starts_with("field,function,nodes,"));
}

#[test]
fn violated_bound_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let a = scaled_delta(dir.path(), "a.rmf", 1.0);
    let b = scaled_delta(dir.path(), "b.rmf", 4.0);
    let (a, b) = (a.to_str().unwrap(), b.to_str().unwrap());
    let ok = metspace(&["distance", a, "--pair", "0:80", "--compare", b]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(metspace(&["distance", a, "--pair", "0:80", "--compare", b, "--tol-stencil=-0.5"]).status.code(), Some(64));
    // the det A = 1 operator identity does not hold for h = f·A·G
    let bad = metspace(&["verify", "divform"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("divform: operator deviation, det A = 1"));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(metspace(&["dl", "--bogus"]).status.code(), Some(64));
    assert_eq!(metspace(&["construct", "nonapprox", "--chart", "2,9"]).status.code(), Some(64));
    let o = metspace(&["verify", "nope"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&o.stderr).contains("metric-axioms"));
    let dir = tempfile::tempdir().unwrap();
    let a = scaled_delta(dir.path(), "a.rmf", 1.0);
    assert_eq!(metspace(&["heat", a.to_str().unwrap(), "--source", "500", "--times", "0.1"]).status.code(), Some(64));
    assert_eq!(metspace(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_input_exits_one() {
    let o = metspace(&["dl", "/nonexistent/a.rmf", "/nonexistent/b.rmf"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/a.rmf"));
}

#[test]
fn thread_count_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let a = scaled_delta(dir.path(), "a.rmf", 1.0);
    let a = a.to_str().unwrap();
    let run = |threads: &str| Command::new(env!("CARGO_BIN_EXE_metspace")).args(["measure", a]).env("METSPACE_THREADS", threads).output().unwrap();
    let two = run("2");
    assert_eq!(two.status.code(), Some(0));
    assert_eq!(stdout(&two), "nodes 81  volume 1.000000\n");
    assert_eq!(run("0").status.code(), Some(64));
}

#[test]
fn geodesic_and_midpoint_reports() {
    let dir = tempfile::tempdir().unwrap();
    let a = scaled_delta(dir.path(), "a.rmf", 1.0);
    let b = scaled_delta(dir.path(), "b.rmf", 4.0);
    let (a, b) = (a.to_str().unwrap(), b.to_str().unwrap());
    let out = dir.path().join("geo");
    let o = metspace(&["geodesic", a, b, "--t", "0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("geodesic-0.5.rmf").exists());
    let o = metspace(&["midpoint", a, b, "--format", "csv"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("dl_g0_g1,dl_g0_m,dl_m_g1"));
    let vals: Vec<f64> = lines.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert!((vals[1] - 0.5 * vals[0]).abs() < 1e-12 && (vals[2] - 0.5 * vals[0]).abs() < 1e-12);
}

#[test]
fn operator_commands_run() {
    let dir = tempfile::tempdir().unwrap();
    let a = scaled_delta(dir.path(), "a.rmf", 1.0);
    let b = scaled_delta(dir.path(), "b.rmf", 4.0);
    let (a, b) = (a.to_str().unwrap(), b.to_str().unwrap());
    assert_eq!(metspace(&["laplacian", a]).status.code(), Some(0));
    assert_eq!(metspace(&["heat", a, "--source", "40", "--times", "0.01,0.02"]).status.code(), Some(0));
    assert_eq!(metspace(&["smooth", a, "--eps", "0.25,0.125"]).status.code(), Some(0));
    assert_eq!(metspace(&["measure", a, "--compare", b]).status.code(), Some(0));
    let o = metspace(&["poincare", a, "--compare", b, "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(metspace(&["poincare", a, "--compare", b, "--radius", "1"]).status.code(), Some(64));
    let o = metspace(&["varadhan", a, "--source", "40", "--target", "44", "--times", "0.002,0.004", "--max-dt", "1e-4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().last().unwrap().contains("distance_squared 0.250000"));
}

#[test]
fn constructions_emit_fields() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = metspace(&["construct", "nonapprox", "--out", d, "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert!((v["results"][0]["dl_to_flat"].as_f64().unwrap() - 0.5 * 100f64.ln()).abs() < 1e-12);
    assert!(dir.path().join("nonapprox.rmf").exists());
    let o = metspace(&["construct", "unbounded", "--radii", "1,2,3", "--out", d]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("dl_to_flat 1.039721"));
}
