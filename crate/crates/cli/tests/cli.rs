use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fracsub(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracsub")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("scenario.cfg");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn run_in(dir: &Path, sub: &str, body: &str, out: &Path) -> Output {
    let cfg = write_config(dir, body);
    fracsub(&[sub, "--config", &cfg, "--out", out.to_str().unwrap()])
}

#[test]
fn empty_check_list_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "run", "checks =\n", &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn missing_config_is_a_config_error() {
    let out = fracsub(&["run", "--config", "/nonexistent/scenario.cfg"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn zero_threads_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "checks = inversion\n");
    let out = fracsub(&["run", "--config", &cfg, "--threads", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn supercritical_order_with_flow_is_an_assumption_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        "run",
        "sigma = 1.2\nchecks = pme_uniqueness\n",
        &dir.path().join("out"),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn emit_without_plot_tables_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("plots");
    let out = run_in(dir.path(), "emit", "checks = inversion\n", &target);
    assert_eq!(out.status.code(), Some(0));
    assert!(!target.exists());
    assert!(out.stdout.is_empty());
}

#[test]
fn default_scenario_passes_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let first = run_in(dir.path(), "run", "checks = all\n", &a);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let report = fs::read_to_string(a.join("report.txt")).unwrap();
    assert_eq!(String::from_utf8_lossy(&first.stdout), report);
    for check in [
        "operator_xval",
        "inversion",
        "exhaustion",
        "energy_identity",
        "decay",
        "extension_trace",
        "pme_uniqueness",
        "perturbation",
    ] {
        assert!(report.lines().any(|l| l.starts_with(check) && l.ends_with("PASS")), "{check}");
    }
    assert!(!report.contains("FAIL"));

    let decay = fs::read_to_string(a.join("decay.csv")).unwrap();
    assert_eq!(decay.lines().next(), Some("log_r,log_u"));
    assert!(decay.lines().count() - 1 >= 16);
    let traj = fs::read_to_string(a.join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().next(), Some("t,mass,sup_v,ratio_bound,ratio_measured"));

    let second = run_in(dir.path(), "run", "checks = all\n", &b);
    assert_eq!(second.status.code(), Some(0));
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 6);
    for name in names {
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
    }

    let plots = dir.path().join("plots");
    let emitted = run_in(dir.path(), "emit", "checks = decay, pme_uniqueness\n", &plots);
    assert_eq!(emitted.status.code(), Some(0));
    for name in ["decay.csv", "decay_fit.csv", "trajectory.csv"] {
        assert_eq!(fs::read(plots.join(name)).unwrap(), fs::read(a.join(name)).unwrap(), "{name}");
    }
    assert!(!plots.join("report.txt").exists());
}
