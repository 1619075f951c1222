use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn signreg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_signreg")).args(args).env_remove("SIGNREG_SEED").output().expect("spawn")
}

fn signreg_env(args: &[&str], seed: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_signreg")).args(args).env("SIGNREG_SEED", seed).output().expect("spawn")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json stdout")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn vc_check_monotone_example() {
    let v = json(&signreg(&["vc-check", "--class", "monotone", "--pieces", "1", "--baseline-pieces", "2", "--grid", "12"]));
    assert_eq!(v["claimed_degree"], 3);
    assert_eq!(v["all_hold"], true);
}

#[test]
fn vc_check_many_baselines_and_classes() {
    for class in ["monotone", "convex-concave", "linear", "single-index", "r-monotone"] {
        let bp = if class == "r-monotone" || class == "single-index" { "1" } else { "2" };
        let v = json(&signreg(&[
            "vc-check", "--class", class, "--pieces", "1", "--baseline-pieces", bp, "--grid", "8", "--baselines", "3",
        ]));
        assert_eq!(v["all_hold"], true, "{class}");
        assert_eq!(v["baselines"].as_array().unwrap().len(), 3);
    }
}

#[test]
fn vc_check_false_claim_fails_certificate() {
    let v = json(&signreg(&[
        "vc-check", "--class", "monotone", "--pieces", "1", "--baseline-pieces", "1", "--grid", "6", "--claimed", "0",
    ]));
    assert_eq!(v["all_hold"], false);
}

#[test]
fn estimate_fixed_partition_example() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "d.csv", "x,y\n1,0.5\n2,2\n3,1\n");
    let v = json(&signreg(&["estimate", "--data", &data, "--class", "fixed-partition", "--blocks", "1-2,3"]));
    let fhat: Vec<f64> = serde_json::from_value(v["fhat"].clone()).unwrap();
    // Block {1,2} takes any median of {0.5, 2}; singleton takes its value.
    assert!(fhat[0] == fhat[1] && (0.5..=2.0).contains(&fhat[0]));
    assert_eq!(fhat[2], 1.0);
    assert_eq!(v["t_value"], 0.0);
}

#[test]
fn estimate_csv_and_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "d.csv", "x,y\n0,3\n1,1\n2,2\n3,5\n");
    let out = signreg(&["--format", "csv", "estimate", "--data", &data, "--class", "nondecreasing"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,fhat"));
    let fhat: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(fhat.len(), 4);
    assert!(fhat.windows(2).all(|w| w[0] <= w[1]));

    let od = dir.path().join("o");
    let out = signreg(&["--out-dir", od.to_str().unwrap(), "estimate", "--data", &data, "--class", "monotone"]);
    assert!(out.status.success());
    assert!(od.join("estimate.json").exists());
}

#[test]
fn estimate_single_index() {
    let dir = tempfile::tempdir().unwrap();
    let mut body = String::from("x1,x2,y\n");
    for i in 0..12 {
        let (a, b) = ((i % 4) as f64, (i / 4) as f64);
        body.push_str(&format!("{a},{b},{}\n", if a + b > 2.0 { 1 } else { 0 }));
    }
    let data = write(dir.path(), "d.csv", &body);
    let v = json(&signreg(&["estimate", "--data", &data, "--class", "single-index:2"]));
    assert_eq!(v["fhat"].as_array().unwrap().len(), 12);
    let bad = signreg(&["estimate", "--data", &data, "--class", "single-index:3"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(signreg(&["estimate", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(signreg(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(signreg(&["bounds", "--case", "rate", "--n", "5", "--d", "10"]).status.code(), Some(2));
    assert_eq!(signreg(&["estimate", "--data", "/nonexistent.csv", "--class", "monotone"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "d.csv", "x,y\n1,nan\n");
    assert_eq!(signreg(&["estimate", "--data", &data, "--class", "monotone"]).status.code(), Some(2));
}

#[test]
fn refusals_exit_three() {
    assert_eq!(signreg(&["vc-check", "--class", "single-index", "--dim", "3"]).status.code(), Some(3));
    // Below the smallest admissible n/D the heavy-tail equation has no root >= 2.
    assert_eq!(signreg(&["bounds", "--case", "heavy-tail", "--n", "1", "--d", "1", "--beta", "1"]).status.code(), Some(3));
    assert_eq!(signreg(&["selftest", "--max-n", "40"]).status.code(), Some(3));
}

#[test]
fn bounds_tables() {
    let out = signreg(&["bounds", "--case", "heavy-tail", "--beta", "1", "--n", "100"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    let (closed, optimized) = (row[4], row[5]);
    assert!((closed - optimized).abs() <= 1e-6 * closed);

    let v = json(&signreg(&["--format", "json", "bounds", "--case", "monotone", "--v-j", "1", "--k", "1", "--n", "1000", "--p", "2"]));
    let b = v[0]["bound_up_to_constants"].as_f64().unwrap();
    // s = 1/2: (V/n)^(1/3) + ((3k-1)/n)^(1/2)
    let expect = (1.0f64 / 1000.0).cbrt() + (2.0f64 / 1000.0).sqrt();
    assert!((b - expect).abs() < 1e-12, "{b} vs {expect}");

    let missing = signreg(&["bounds", "--case", "single-index"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn approx_methods() {
    for m in ["block-mean", "chord"] {
        let v = json(&signreg(&["approx", "--curve", "pow:0.5", "--method", m, "--k", "3", "--n", "30"]));
        assert_eq!(v["method"], m);
    }
    let v = json(&signreg(&[
        "approx", "--curve", "pow:0.5", "--method", "interp", "--mode", "2", "--measure", "design", "--design", "quadratic",
    ]));
    assert!(v["certificate"].is_object());
    let no_blocks = signreg(&["approx", "--curve", "pow:0.5", "--method", "piecewise-constant"]);
    assert_eq!(no_blocks.status.code(), Some(2));
}

#[test]
fn simulate_is_deterministic_and_seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "s.json", r#"{"kind":"hetero_span","n":200,"seed":5}"#);
    let args = ["simulate", "--scenario", sc.as_str(), "--reps", "20"];
    let a = signreg(&args);
    let b = signreg(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).starts_with("rep,seed,estimator,n,ell_loss,runtime_ms"));

    let summary = |out: &Output| json(out)["seed"].as_u64().unwrap();
    let jargs = ["--format", "json", "simulate", "--scenario", sc.as_str(), "--reps", "5"];
    assert_eq!(summary(&signreg(&jargs)), 5);
    assert_eq!(summary(&signreg_env(&jargs, "9")), 9);
    let mut flagged = vec!["--seed", "11"];
    flagged.extend_from_slice(&jargs);
    assert_eq!(summary(&signreg_env(&flagged, "9")), 11);
    assert_eq!(signreg_env(&jargs, "nope").status.code(), Some(2));

    let od = dir.path().join("run");
    let out = signreg(&["--out-dir", od.to_str().unwrap(), "simulate", "--scenario", &sc, "--reps", "5"]);
    assert!(out.status.success());
    assert!(od.join("replications.csv").exists() && od.join("summary.json").exists());
}

#[test]
fn selftest_passes() {
    let v = json(&signreg(&["selftest", "--instances", "100", "--max-n", "6"]));
    assert_eq!(v["passed"], true);
    assert_eq!(v["suites"].as_array().unwrap().len(), 5);
}
