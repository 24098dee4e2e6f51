use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bzwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bzwave")).args(args).output().expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn kpp_speed_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let out = bzwave(&["speeds", "--experiment", "kpp_beta", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json(&dir.path().join("speeds.json"));
    let c = rep["report"]["speed"].as_f64().unwrap();
    assert!((c - 2.0).abs() <= 0.1, "c = {c}");
}

#[test]
fn profile_preset_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = bzwave(&["profile", "--preset", "r2b2h0", "--eps", "0.05", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json(&dir.path().join("profile.json"));
    let c = rep["c"].as_f64().unwrap();
    assert!(c > 0.0 && c < 2.0);
    let csv = fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert!(csv.starts_with("xi,phi,psi\n") && !csv.contains('\r'));

    let prov = json(&dir.path().join("provenance.json"));
    assert_eq!(prov["config"]["eps"]["source"], "flag");
    assert_eq!(prov["config"]["h"]["source"], "preset");
    assert_eq!(prov["config"]["tol"]["source"], "default");
    assert_eq!(prov["exit_code"], 0);
    assert!(prov["wall_time_s"].as_f64().is_some());
}

#[test]
fn infeasible_subsolution_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bzwave(&["subsuper", "--kind", "sub", "--r", "2", "--b", "2", "--eps", "0.6", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("rb/7"), "{err}");
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "r = 2\nb = banana\n").unwrap();
    let out = bzwave(&["profile", "--config", cfg.to_str().unwrap(), "--out", d]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    assert_eq!(bzwave(&["profile", "--colour", "red", "--out", d]).status.code(), Some(2));
    assert_eq!(bzwave(&["integrate", "--out", d]).status.code(), Some(2));
    assert_eq!(bzwave(&["phase", "--preset", "fig7", "--out", d]).status.code(), Some(2));
    assert_eq!(bzwave(&["phase", "--preset", "fig1a"]).status.code(), Some(2));
}

#[test]
fn empty_file_and_flags_only_agree() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.cfg");
    fs::write(&empty, "# nothing here\n").unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let flags = ["--r", "2", "--b", "2", "--h", "0", "--eps", "1", "--nu", "40", "--nv", "40"];
    let mut with_file = vec!["phase", "--config", empty.to_str().unwrap(), "--out", a.to_str().unwrap()];
    with_file.extend(flags);
    let mut bare = vec!["phase", "--out", b.to_str().unwrap()];
    bare.extend(flags);
    assert_eq!(bzwave(&with_file).status.code(), Some(0));
    assert_eq!(bzwave(&bare).status.code(), Some(0));
    for f in ["nullclines.csv", "vector_field.csv", "phase.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let d = dir.path().join(sub);
        let out = bzwave(&["manifold", "--eps", "0.05", "--n-pairs", "4", "--out", d.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        d
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["manifold.csv", "manifold.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn failed_verification_exits_with_one() {
    // The small-box decay envelope does not hold; see the acceptance suite.
    let dir = tempfile::tempdir().unwrap();
    let out = bzwave(&["phase", "--preset", "appendixA", "--nu", "10", "--nv", "10", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let prov = json(&dir.path().join("provenance.json"));
    assert_eq!(prov["status"], "verification_failed");
    assert!(dir.path().join("trajectory.csv").exists());
}
