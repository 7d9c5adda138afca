//! End-to-end checks of the `mpjc` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mpjc::scenario::{preset, ScenarioConfig};

fn mpjc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpjc"))
        .args(args)
        .env("MPJC_WORKERS", "2")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const CUSTOM: &str = r#"
name = "decay"
kind = "custom"
output = "decay.csv"
fock_cutoff = 6

[params]
N = 2
M = 1
g = 3.0
gamma = 0.2

[pulse]
kind = "gaussian"
amplitude = 1.5
width = 0.5
center = 3.0

[grid]
kind = "linear"
start = 0.0
stop = 4.0
points = 41

[initial]
kind = "basis"
atom = "excited"
n = 1
"#;

#[test]
fn validate_reports_rotation_precondition() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = preset("fig2a").unwrap().remove(0);
    cfg.params.drive_order = 2;
    let path = write(dir.path(), "bad.toml", &cfg.to_toml_string());
    let out = mpjc(&["validate", &path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("rotation scenario requires M < N"));
}

#[test]
fn validate_reports_absorption_precondition_and_low_cutoff() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = preset("fig4").unwrap().remove(0);
    cfg.params.drive_order = 2;
    cfg.params.jc_order = 3;
    cfg.fock_cutoff = Some(4);
    let path = write(dir.path(), "bad.toml", &cfg.to_toml_string());
    let out = mpjc(&["validate", &path]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("requires M = N"), "{text}");
    assert!(text.contains("below N + 2"), "{text}");
}

#[test]
fn malformed_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "bad.toml",
        &CUSTOM.replace("points = 41", "pionts = 41"),
    );
    let out = mpjc(&["run", &path, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["category"], "config");
}

#[test]
fn emitted_presets_validate_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = mpjc(&[
        "preset",
        "all",
        "--out",
        dir.path().to_str().unwrap(),
        "--configs-only",
    ]);
    assert!(out.status.success());
    let mut count = 0;
    for entry in fs::read_dir(dir.path()).unwrap() {
        let path = entry.unwrap().path();
        let out = mpjc(&["validate", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}", path.display());
        assert!(String::from_utf8_lossy(&out.stdout).ends_with(": ok\n"));
        count += 1;
    }
    assert_eq!(count, 18);
}

#[test]
fn runs_are_deterministic_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "decay.toml", CUSTOM);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, extra) in [(&a, None), (&b, Some("--sequential"))] {
        let mut args = vec!["run", &cfg, "--out", out.to_str().unwrap()];
        args.extend(extra);
        let res = mpjc(&args);
        assert!(
            res.status.success(),
            "{}",
            String::from_utf8_lossy(&res.stderr)
        );
    }
    let csv_a = fs::read(a.join("decay.csv")).unwrap();
    assert_eq!(csv_a, fs::read(b.join("decay.csv")).unwrap());

    let text = String::from_utf8(csv_a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,eps,P_0,P_1,P_2,P_3,P_4,n_mean,P_e,leakage"
    );
    assert_eq!(lines.count(), 41);

    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(a.join("decay.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["rows"], 41);
    // starts at the configured cutoff and escalates in steps of 4
    assert_eq!(manifest["summary"]["fock_cutoff"].as_u64().unwrap() % 4, 2);
    assert_eq!(manifest["workers"], 2);
    assert!(manifest["violations"].as_array().unwrap().is_empty());
    let echoed: ScenarioConfig = serde_json::from_value(manifest["config"].clone()).unwrap();
    assert_eq!(echoed, ScenarioConfig::from_toml_str(CUSTOM).unwrap());
}

#[test]
fn parallel_and_sequential_sweeps_agree_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = preset("fig4").unwrap().remove(2);
    cfg.grid = mpjc::scenario::GridSpec::Linear {
        start: -0.3,
        stop: 0.3,
        points: 13,
    };
    let path = write(dir.path(), "scan.toml", &cfg.to_toml_string());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(mpjc(&["run", &path, "--out", a.to_str().unwrap()])
        .status
        .success());
    assert!(
        mpjc(&["run", &path, "--out", b.to_str().unwrap(), "--sequential"])
            .status
            .success()
    );
    let csv = fs::read(a.join(&cfg.output)).unwrap();
    assert_eq!(csv, fs::read(b.join(&cfg.output)).unwrap());
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("delta_p,absorption,n_mean,absorption_g0\n"));
    assert_eq!(text.lines().count(), 14);
}

#[test]
fn exhausted_cutoff_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = CUSTOM
        .replace(
            "kind = \"gaussian\"\namplitude = 1.5\nwidth = 0.5\ncenter = 3.0",
            "kind = \"constant\"\namplitude = 12.0",
        )
        .replace("stop = 4.0\npoints = 41", "stop = 1.0\npoints = 3")
        .replace(
            "[initial]\nkind = \"basis\"\natom = \"excited\"\nn = 1\n",
            "",
        );
    let path = write(dir.path(), "flood.toml", &text);
    let out = mpjc(&["run", &path, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["category"], "cutoff_limit");
    assert!(!dir.path().join("decay.csv").exists());
}

#[test]
fn bad_worker_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "decay.toml", CUSTOM);
    let out = Command::new(env!("CARGO_BIN_EXE_mpjc"))
        .args(["run", &path, "--out", dir.path().to_str().unwrap()])
        .env("MPJC_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
