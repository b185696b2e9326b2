//! End-to-end command-line checks: exit codes, flags, artifact files and
//! reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_schrodingerize"))
}

fn run(args: &[&str], out_dir: &Path) -> Output {
    bin()
        .args(args)
        .arg("--out")
        .arg(out_dir)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("schro-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn help_lists_every_flag() {
    let out = bin().arg("run").arg("--help").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for flag in [
        "--system", "--psi", "--eps", "--np", "--average", "--lift", "--lift-ns", "--lift-m",
        "--oracle-tol", "--out", "--threads",
    ] {
        assert!(text.contains(flag), "missing {flag} in run --help");
    }
    let out2 = bin().arg("study").arg("--help").output().unwrap();
    let text2 = String::from_utf8_lossy(&out2.stdout);
    for flag in ["--np-list", "--eps-list", "--np-cap", "--rmax", "--l-list", "--beta"] {
        assert!(text2.contains(flag), "missing {flag} in study --help");
    }
}

#[test]
fn zero_system_is_exact() {
    let dir = tmp("zero");
    let out = run(&["run", "--system", "zero", "--psi", "exp_abs", "--np", "64"], &dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // "exact" up to the transform round trip: the propagator phases are
    // identically one for A = 0, so only FFT epsilon noise remains.
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("run.json")).unwrap()).unwrap();
    assert!(json["rel_error"].as_f64().unwrap() <= 1e-14);
}

#[test]
fn config_errors_exit_2() {
    let dir = tmp("cfg");
    let out = run(&["run", "--system", "/nonexistent/file.toml"], &dir);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/nonexistent/file.toml"), "message names the path: {err}");
    // bad profile
    let out2 = run(&["run", "--system", "zero", "--psi", "wavelet"], &dir);
    assert_eq!(out2.status.code(), Some(2));
    // bad study name
    let out3 = run(&["study", "frobnicate"], &dir);
    assert_eq!(out3.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_3() {
    let dir = tmp("num");
    // An anti-Hermitian generator so large the propagator norm overflows
    // the squaring budget (the recovery window stays valid since H1 = 0).
    let sys = dir.join("fast-rotation.toml");
    std::fs::write(
        &sys,
        "dim = 2\nA = [[0.0, 1e19], [-1e19, 0.0]]\nu0 = [1.0, 0.0]\nT = 1.0\n",
    )
    .unwrap();
    let out = run(
        &["run", "--system", sys.to_str().unwrap(), "--psi", "exp_abs", "--np", "64", "--eps", "1e-2"],
        &dir,
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn system_file_round_trip() {
    let dir = tmp("file");
    let sys = dir.join("std2.toml");
    std::fs::write(
        &sys,
        r#"
dim = 2
A = [[-1.0, 0.5], [-0.5, -2.0]]
b = [1.0, 0.0]
u0 = [1.0, 1.0]
T = 1.0
psi = "erf:eps=1e-6"
epsilon = 1e-6
"#,
    )
    .unwrap();
    let out = run(&["run", "--system", sys.to_str().unwrap(), "--np", "512"], &dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    // matches the builtin std2 result
    assert!(text.contains("profile       : erf:eps=1e-6"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("run.json")).unwrap()).unwrap();
    assert!(json["rel_error"].as_f64().unwrap() <= 1e-5);
}

#[test]
fn identical_invocations_reproduce_identical_files() {
    let dir_a = tmp("repro-a");
    let dir_b = tmp("repro-b");
    let args = [
        "study", "converge", "--system", "std2", "--psi", "erf:eps=1e-4", "--eps", "1e-4",
        "--np-list", "64,128,256", "--threads", "2",
    ];
    let oa = run(&args, &dir_a);
    let ob = run(&args, &dir_b);
    assert!(oa.status.success() && ob.status.success());
    let csv_a = std::fs::read(dir_a.join("converge.csv")).unwrap();
    let csv_b = std::fs::read(dir_b.join("converge.csv")).unwrap();
    assert_eq!(csv_a, csv_b, "CSV artifacts must be byte-identical");
    let run_a = run(&["run", "--system", "std2", "--np", "128"], &dir_a);
    let run_b = run(&["run", "--system", "std2", "--np", "128"], &dir_b);
    assert!(run_a.status.success() && run_b.status.success());
    assert_eq!(
        std::fs::read(dir_a.join("run.json")).unwrap(),
        std::fs::read(dir_b.join("run.json")).unwrap(),
        "run.json must be byte-identical"
    );
}

#[test]
fn truncation_study_reports_rate() {
    let dir = tmp("trunc");
    let out = run(
        &[
            "study", "truncation", "--system", "std2-homo", "--psi", "erf:eps=1e-10",
            "--l-list", "4,8,16", "--np", "256",
        ],
        &dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("decay rate"));
    assert!(dir.join("truncation.csv").exists());
}
