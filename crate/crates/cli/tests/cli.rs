use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use solitonscope::config::{ExperimentConfig, Scenario, Stage};
use solitonscope::{run, CheckStatus, RunOptions};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_solitonscope"));
    cmd.env_remove("OUTPUT_DIR");
    cmd
}

/// A short free run that exercises every stage up to the phase slope.
fn quick() -> ExperimentConfig {
    let mut cfg = Scenario::IdentitySuite.default_config();
    cfg.solver.t_final = 0.5;
    cfg
}

/// A short soliton run that reaches the fit and distance stages.
fn quick_soliton() -> ExperimentConfig {
    let mut cfg = Scenario::SolitonRegression.default_config();
    cfg.solver.dt = 1e-3;
    cfg.solver.t_final = 1.0;
    cfg.solver.output_stride = 50;
    cfg
}

fn write_config(dir: &Path, name: &str, cfg: &ExperimentConfig) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, cfg.to_toml().unwrap()).unwrap();
    path
}

fn exec(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    eprintln!("{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn passing_run_exits_zero_and_writes_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "q.toml", &quick());
    let out_dir = tmp.path().join("out");
    let out = exec(bin().arg("run").arg(&cfg).arg("--output-dir").arg(&out_dir));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    for f in [
        "MANIFEST",
        "config.toml",
        "metrics.json",
        "report.json",
        "conserved.csv",
        "flux.csv",
        "splitting.csv",
    ] {
        assert!(out_dir.join(f).exists(), "missing {f}");
    }
    let manifest = fs::read_to_string(out_dir.join("MANIFEST")).unwrap();
    assert!(manifest.contains("status: complete"));
    let conserved = fs::read_to_string(out_dir.join("conserved.csv")).unwrap();
    let first = conserved.lines().nth(1).unwrap().split(',').next().unwrap();
    assert_eq!(first, "0.0000000000000000e0");
}

#[test]
fn failed_check_exits_one_and_report_agrees() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = quick();
    cfg.thresholds.mass_drift = Some(0.0);
    cfg.thresholds.energy_drift = Some(-1.0);
    let path = write_config(tmp.path(), "q.toml", &cfg);
    let out_dir = tmp.path().join("out");
    let out = exec(bin().arg("run").arg(&path).arg("--output-dir").arg(&out_dir));
    assert_eq!(out.status.code(), Some(1));
    let again = exec(bin().arg("report").arg(&out_dir));
    assert_eq!(again.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&again.stdout).contains("[FAIL] energy_drift"));
}

#[test]
fn execution_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = exec(bin().arg("run").arg(tmp.path().join("nope.toml")));
    assert_eq!(missing.status.code(), Some(2));

    let mut cfg = quick();
    cfg.solver.dt = 0.0;
    let bad = write_config(tmp.path(), "bad.toml", &cfg);
    assert_eq!(exec(bin().arg("run").arg(&bad)).status.code(), Some(2));

    assert_eq!(exec(bin().arg("report").arg(tmp.path())).status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = quick();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    run(
        &cfg,
        &RunOptions {
            output_dir: Some(a.clone()),
            ..Default::default()
        },
    )
    .unwrap();
    run(
        &cfg,
        &RunOptions {
            output_dir: Some(b.clone()),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(artifacts(&a), artifacts(&b));
}

#[test]
fn seed_changes_random_data() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = quick();
    cfg.solver.t_final = 0.05;
    let a = tmp.path().join("a");
    run(
        &cfg,
        &RunOptions {
            output_dir: Some(a.clone()),
            ..Default::default()
        },
    )
    .unwrap();
    cfg.seed += 1;
    let b = tmp.path().join("b");
    run(
        &cfg,
        &RunOptions {
            output_dir: Some(b.clone()),
            ..Default::default()
        },
    )
    .unwrap();
    assert_ne!(
        fs::read(a.join("trajectory.csv")).unwrap(),
        fs::read(b.join("trajectory.csv")).unwrap()
    );
}

#[test]
fn stage_until_leaves_later_checks_unevaluated() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("out");
    let outcome = run(
        &quick_soliton(),
        &RunOptions {
            output_dir: Some(dir.clone()),
            stage_until: Some(Stage::Hydro),
        },
    )
    .unwrap();
    assert!(!dir.join("boxes.json").exists() && !dir.join("distances.csv").exists());
    assert!(dir.join("flux.csv").exists());
    for c in &outcome.report.checks {
        let expect = if c.stage <= Stage::Hydro {
            CheckStatus::Pass
        } else {
            CheckStatus::Unevaluated
        };
        assert_eq!(c.status, expect, "{}: {:?}", c.name, c);
    }
    assert!(outcome.report.pass);
}

#[test]
fn full_soliton_pipeline_reaches_distances() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("out");
    let outcome = run(
        &quick_soliton(),
        &RunOptions {
            output_dir: Some(dir.clone()),
            ..Default::default()
        },
    )
    .unwrap();
    for f in [
        "boxes.json",
        "phase.csv",
        "lift.json",
        "slope.json",
        "profile.csv",
        "profile.json",
        "weak.csv",
        "distances.csv",
    ] {
        assert!(dir.join(f).exists(), "missing {f}");
    }
    let s = &outcome.report.summary;
    assert!((s.e_fit.unwrap() - 1.0).abs() < 1e-3, "{:?}", s.e_fit);
    assert!((s.e_hat.unwrap() - 1.0).abs() < 1e-3, "{:?}", s.e_hat);
}

#[test]
fn missing_artifact_for_a_run_stage_fails_the_report() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("out");
    run(
        &quick(),
        &RunOptions {
            output_dir: Some(dir.clone()),
            ..Default::default()
        },
    )
    .unwrap();
    fs::remove_file(dir.join("flux.csv")).unwrap();
    let report = solitonscope::evaluate(&dir).unwrap();
    assert!(!report.pass);
    let c = report.checks.iter().find(|c| c.name == "flux_balance").unwrap();
    assert_eq!(c.status, CheckStatus::Fail);
    assert_eq!(c.value, None);
}

#[test]
fn output_dir_env_is_joined_with_the_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = quick();
    cfg.solver.t_final = 0.05;
    let path = write_config(tmp.path(), "q.toml", &cfg);
    let out = exec(bin().arg("run").arg(&path).env("OUTPUT_DIR", tmp.path().join("env")));
    assert_eq!(out.status.code(), Some(0));
    assert!(tmp.path().join("env/identity_suite/MANIFEST").exists());
}

#[test]
fn suite_runs_every_config_into_its_own_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let mut a = quick();
    a.solver.t_final = 0.05;
    a.output_dir = tmp.path().join("runs/a");
    let mut b = a.clone();
    b.output_dir = tmp.path().join("runs/b");
    b.thresholds.mass_drift = Some(-1.0);
    write_config(tmp.path(), "a.toml", &a);
    write_config(tmp.path(), "b.toml", &b);
    fs::write(tmp.path().join("notes.txt"), "not a config").unwrap();
    let out = exec(bin().arg("suite").arg(tmp.path()));
    assert_eq!(out.status.code(), Some(1));
    assert!(tmp.path().join("runs/a/MANIFEST").exists() && tmp.path().join("runs/b/MANIFEST").exists());
}

#[test]
fn failing_stage_marks_the_run_incomplete() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = Scenario::FluxClassifier.default_config();
    cfg.solver.picard_tol = Some(1e-300);
    cfg.solver.picard_max_iter = Some(3);
    let dir = tmp.path().join("out");
    let err = run(
        &cfg,
        &RunOptions {
            output_dir: Some(dir.clone()),
            ..Default::default()
        },
    )
    .unwrap_err();
    assert!(err.to_string().contains("evolve"), "{err}");
    let manifest = fs::read_to_string(dir.join("MANIFEST")).unwrap();
    assert!(manifest.contains("status: incomplete"), "{manifest}");
    assert!(dir.join("config.toml").exists() && dir.join("metrics.json").exists());
    assert_eq!(exec(bin().arg("report").arg(&dir)).status.code(), Some(2));
}

#[test]
fn suite_separates_configs_that_share_an_output_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let mut a = quick();
    a.solver.t_final = 0.05;
    a.output_dir = tmp.path().join("runs/same");
    write_config(tmp.path(), "one.toml", &a);
    write_config(tmp.path(), "two.toml", &a);
    let out = exec(bin().arg("suite").arg(tmp.path()));
    assert_eq!(out.status.code(), Some(0));
    assert!(tmp.path().join("runs/same/one/MANIFEST").exists());
    assert!(tmp.path().join("runs/same/two/MANIFEST").exists());
}
