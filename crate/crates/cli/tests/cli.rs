use std::path::PathBuf;
use std::process::{Command, Output};

fn fermitree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fermitree"))
        .args(args)
        .env("FERMITREE_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fermitree-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_pfaffian_passes() {
    let o = fermitree(&["verify", "--suite", "pfaffian", "--seed", "7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 100);
    assert!(text.lines().all(|l| l.contains("\"passed\":true")));
}

#[test]
fn verify_recursion_small_trees() {
    let o = fermitree(&["verify", "--suite", "recursion", "--m", "2", "--tol", "1e-10", "--format", "csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("suite,instances,failures,max_error\nrecursion,"));
    assert!(text.lines().nth(1).unwrap().split(',').nth(2) == Some("0"));
}

#[test]
fn empty_suite_is_a_usage_error() {
    let o = fermitree(&["verify", "--suite", ""]);
    assert_eq!(o.status.code(), Some(2));
    let o = fermitree(&["verify", "--suite", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
    let o = fermitree(&["verify", "--bogus-flag"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tolerance_violations_fail_and_replay() {
    let out = scratch("strict.jsonl");
    let o = fermitree(&[
        "verify",
        "--suite",
        "free-energy",
        "--limit",
        "2",
        "--tol",
        "1e-30",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("FAILED {"), "{stderr}");
    let report = std::fs::read_to_string(&out).unwrap();
    assert_eq!(report.lines().count(), 2);
    let again = fermitree(&["replay", "--failed-only", out.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(1));
    // replayed rows reproduce the stored ones exactly
    assert_eq!(stdout(&again), report);
}

#[test]
fn reports_are_thread_independent() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_fermitree"))
            .args(["verify", "--suite", "recursion,gram", "--m", "3", "--configs", "2", "--seed", "3"])
            .env("FERMITREE_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn bounds_on_quartic_paths() {
    let o = fermitree(&["bounds", "--m", "3", "--branches", "0", "--legs", "4", "--n-max", "8", "--format", "csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let header = text.lines().next().unwrap();
    assert!(header.contains("theorem1") && header.contains("status"));
    assert_eq!(text.lines().count(), 1 + 5);
}

#[test]
fn bounds_caterpillar_and_branch_filter() {
    let o = fermitree(&["bounds", "--caterpillar", "--m", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = json["rows"].as_array().unwrap();
    assert!(rows.iter().any(|r| r["theorem2"].is_number()));

    let o = fermitree(&["bounds", "--m", "4", "--branches", "0", "--legs", "2", "--n-max", "8"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let four = json["rows"].as_array().unwrap().iter().filter(|r| r["n"].as_array().unwrap().len() == 4).count();
    assert_eq!(four, 12);
}

#[test]
fn bounds_marks_infeasible_amplitudes() {
    let o = fermitree(&["bounds", "--m", "2", "--legs", "4", "--n-max", "8", "--lattice", "8", "--nspin", "2", "--format", "csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("bound-only"));
}

#[test]
fn scaling_synthetic_and_model() {
    let o = fermitree(&["scaling", "--synthetic", "--j-min", "1", "--j-max", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let est = json["fit"]["estimates"].as_array().unwrap();
    let slope = |q: &str| est.iter().find(|e| e["quantity"] == q).unwrap()["slope"].as_f64().unwrap();
    assert!((slope("sup_hat") - 1.0).abs() < 1e-9);
    assert!((slope("l1_hat") + 1.0).abs() < 1e-9);

    let o = fermitree(&["scaling", "--M", "2", "--j-min", "2", "--j-max", "5", "--d", "1", "--format", "csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("j,sup_hat,l1_hat,l1_pos,grad_sup,grad_l1,frak_c\n"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn scaling_usage_and_resolution_errors() {
    let o = fermitree(&["scaling", "--j-min", "2", "--j-max", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = fermitree(&["scaling", "--j-min", "2", "--j-max", "5", "--lattice", "8"]);
    assert_eq!(o.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("need at least"), "{stderr}");
}
