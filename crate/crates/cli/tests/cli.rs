use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn starlocal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_starlocal"))
        .args(args)
        .env_remove("STARLOCAL_MAX_DIM")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let out = starlocal(&full);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("starlocal-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn verify_passes_every_criterion() {
    let out = starlocal(&["verify"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(stderr.lines().filter(|l| l.starts_with("PASS")).count(), 13);
    assert!(!stderr.contains("FAIL"));
}

#[test]
fn noise_threshold_n3() {
    let v = json(&["noise", "--n", "3", "--grid", "11"]);
    let t = v["summary"]["threshold"].as_f64().unwrap();
    assert!((t - 2f64.powf(-1.5)).abs() < 1e-6);
    assert_eq!(v["rows"].as_array().unwrap().len(), 11);
    assert_eq!(v["schema"], "starlocal/noise/v1");
}

#[test]
fn efficiency_threshold_n2() {
    let v = json(&["efficiency", "--n", "2", "--grid", "5"]);
    let t = v["summary"]["threshold"].as_f64().unwrap();
    assert!((t - 2.0 / (1.0 + 2f64.sqrt())).abs() < 1e-4);
}

#[test]
fn ghz_n3_violates() {
    let v = json(&["ghz", "--n", "3", "--grid", "3"]);
    let lhs = v["summary"]["lhs"].as_f64().unwrap();
    assert!((lhs - 2.0 * 2f64.sqrt()).abs() < 1e-9);
    assert_eq!(v["summary"]["bound"].as_f64().unwrap(), 2.0);
    assert_eq!(v["summary"]["violated"], true);
    let cols: Vec<&str> = v["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    assert_eq!(
        cols,
        ["eta", "I_000", "I_110", "I_101", "I_011", "lhs", "bound", "violated"]
    );
}

#[test]
fn region_quantum_curve() {
    let v = json(&["region", "--n", "2", "--grid", "101"]);
    for row in v["rows"].as_array().unwrap() {
        if row["curve"] == "quantum" {
            let (i, j) = (row["I"].as_f64().unwrap(), row["J"].as_f64().unwrap());
            assert!((i.abs() + j.abs() - 1.0).abs() < 1e-12);
        }
    }
    let v = json(&["region", "--n", "4", "--grid", "5"]);
    assert!(v["summary"]["quantum_lhs_at_pi_over_4"].as_f64().unwrap() > 1.4);
}

#[test]
fn sdp_command() {
    let v = json(&["sdp", "--n", "2", "--alpha", "1"]);
    let i = v["rows"][0]["I"].as_f64().unwrap();
    assert!((i - 0.5).abs() < 1e-4);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn identical_config_gives_identical_files() {
    let (a, b) = (scratch("a.csv"), scratch("b.csv"));
    for path in [&a, &b] {
        let out = starlocal(&[
            "noise",
            "--n",
            "2",
            "--grid",
            "7",
            "--seed",
            "5",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
    }
    let (ra, rb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ra, rb);
    let text = String::from_utf8(ra).unwrap();
    assert!(text.starts_with("# schema: starlocal/noise/v1\n"));
    assert!(text.contains("\nV,I,J,lhs,bound,violated\n"));
}

#[test]
fn rejects_out_of_range_n() {
    let out = starlocal(&["ghz", "--n", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n must be in"));
}

#[test]
fn dimension_guard_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_starlocal"))
        .args(["noise", "--n", "3", "--grid", "3"])
        .env("STARLOCAL_MAX_DIM", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("size error"));
    let out = Command::new(env!("CARGO_BIN_EXE_starlocal"))
        .args(["noise"])
        .env("STARLOCAL_MAX_DIM", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
