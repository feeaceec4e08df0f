use std::process::{Command, Output};

fn iscra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iscra")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn solve_writes_artifacts_and_reaches_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = iscra(&[
        "solve", "--preset", "exam41", "--e", "0.05", "--solver", "iscra", "--lambda", "0.1", "--rho", "0.8", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "solver,lambda,c_lambda,seed,relerr,nnz,loss,time_s,outer_iters,inexactness");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 10);
    assert_eq!(row[0], "iscra");
    assert_eq!(row[7], "", "time column is empty without --record-time");

    let solution: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("solution.json")).unwrap()).unwrap();
    let x: Vec<f64> = serde_json::from_value(solution["x"].clone()).unwrap();
    for (got, want) in x.iter().zip([0.0, 0.0, 2.05, 10.05]) {
        assert!((got - want).abs() <= 1e-6, "{x:?}");
    }
    assert!(dir.path().join("trace.json").exists());
    assert_eq!(std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap(), text);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"lambda": 0.2, "rho": 0.8}"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = stdout(&iscra(&["solve", "--preset", "exam41", "--config", cfg]));
    assert!(from_file.lines().nth(1).unwrap().starts_with("iscra,0.2,"));
    let overridden = stdout(&iscra(&["solve", "--preset", "exam41", "--config", cfg, "--lambda", "0.1"]));
    assert!(overridden.lines().nth(1).unwrap().starts_with("iscra,0.1,"));
}

#[test]
fn unknown_preset_fails_with_a_message() {
    let out = iscra(&["solve", "--preset", "exam99", "--lambda", "0.1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown preset"));
}

#[test]
fn missing_file_fails() {
    let out = iscra(&["solve", "--libsvm", "/nonexistent/file.svm", "--lambda", "0.1"]);
    assert!(!out.status.success());
}

#[test]
fn synthetic_solve_by_scale() {
    let out = iscra(&["solve", "--synthetic", "exam51", "--m", "80", "--seed", "7", "--solver", "iscra", "--clambda", "10"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).lines().count(), 2);
}

#[test]
fn single_cell_sweep_has_two_rows() {
    let out = iscra(&["sweep", "--synthetic", "exam51", "--m", "60", "--clambdas", "10", "--solvers", "lasso", "--seeds", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let seeds: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(seeds, ["3", "mean"]);
}

#[test]
fn sensitivity_sweep_labels_variants() {
    let out = iscra(&[
        "sweep", "--synthetic", "exam51", "--m", "60", "--clambdas", "10", "--mus", "5,1000", "--rhos", "0.4", "--seeds", "1",
    ]);
    let text = stdout(&out);
    let labels: Vec<&str> = text.lines().skip(1).step_by(2).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(labels, ["iscra[mu=5]", "iscra[mu=1000]", "iscra[rho=0.4]"]);
}

#[test]
fn diagnose_reports_toy_verdicts() {
    let out = iscra(&["diagnose", "--preset", "exam31", "--lambda", "0.1"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let verdicts = report["nsp_verdicts"].as_array().unwrap();
    let violated = |kind: &str| {
        verdicts.iter().any(|v| v["query"]["kind"] == kind && v["verdict"]["verdict"] == "violated")
    };
    assert!(violated("robust-nsp"));
    assert!(violated("rec"));
    let beta0 = report["beta0_exact"].to_string();
    assert!(beta0.contains("8.6"), "{beta0}");
}

#[test]
fn verify_exit_codes() {
    assert!(iscra(&["verify"]).status.success());
    let skipped = iscra(&["verify", "--lambda", "0.35"]);
    assert!(skipped.status.success());
    assert!(stdout(&skipped).contains("SKIP exam41-baseline-contrast"));
    let faulty = iscra(&["verify", "--inject-fault", "corrupt-prox"]);
    assert!(!faulty.status.success());
    assert!(stdout(&faulty).contains("FAIL moreau-identity"));
}
