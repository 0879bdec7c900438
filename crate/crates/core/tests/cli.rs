//! Exit codes and file outputs of the `inno-deepc` binary.

use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inno-deepc")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn offline_workflow_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let out = run(p, &["collect-data", "--seed", "3", "--out", "data.csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(p.join("data.csv").exists());

    let out = run(p, &["fit-varx", "--in", "data.csv", "--out", "varx.csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("79"));
    assert!(p.join("varx.csv").exists() && p.join("varx_innovations.csv").exists());

    let out = run(p, &["fit-varx", "--in", "data.csv", "--out", "ridge.csv", "--ridge", "1e-3", "--innovations", "e.csv"]);
    assert_eq!(code(&out), 0);
    assert!(p.join("e.csv").exists());
}

#[test]
fn verify_reports_failure_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(&run(p, &["collect-data", "--out", "data.csv", "--set", "noise_v_std=0", "--set", "noise_w_std=0"])), 0);
    let out = run(p, &["verify", "--in", "data.csv", "--ranks-out", "ranks.csv"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("r-controllability"), "{text}");
    // The stiff line modes keep the certificate below its expected rank.
    assert_eq!(code(&out), 2, "{text}");
    assert!(p.join("ranks.csv").exists());
}

#[test]
fn experiment_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let out = run(p, &["run-experiment", "--seeds", "1", "--out", "rep", "--set", "run_steps=30", "--set", "switch_step=30"]);
    assert!(matches!(code(&out), 0 | 2), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["config.txt", "summary.csv", "steps_seed0.csv", "plot_seed0.svg"] {
        assert!(p.join("rep").join(name).exists(), "{name} missing");
    }
    let out = run(p, &["compare", "--in", "rep"]);
    assert_eq!(code(&out), 0);
    let table = String::from_utf8_lossy(&out.stdout);
    for name in ["inno-deepc", "reg-deepc", "spc"] {
        assert!(table.contains(name), "{table}");
    }
}

#[test]
fn errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(&run(p, &["verify", "--in", "missing.csv"])), 1);
    assert_eq!(code(&run(p, &["collect-data", "--out", "x.csv", "--set", "no_such_key=1"])), 1);
    assert_eq!(code(&run(p, &["collect-data", "--out", "x.csv", "--set", "L_p"])), 1);
    assert_eq!(code(&run(p, &["compare", "--in", "nowhere"])), 1);
    std::fs::write(p.join("bad.cfg"), "L_p = twelve\n").unwrap();
    assert_eq!(code(&run(p, &["collect-data", "--out", "x.csv", "--config", "bad.cfg"])), 1);
}
