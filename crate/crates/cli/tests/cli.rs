use std::fs;
use std::process::{Command, Output};

use cat_bench::output::read_records;

fn catopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catopt"))
        .args(args)
        .output()
        .expect("catopt runs")
}

#[test]
fn run_prints_json_and_exits_zero_when_optimal() {
    let out = catopt(&["run", "--problem", "rosenbrock", "--dim", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["status"], "OPTIMAL");
    assert_eq!(v["problem"], "rosenbrock:2");
    assert_eq!(v["solver"], "cat");
}

#[test]
fn exit_codes() {
    let limited = catopt(&[
        "run",
        "--problem",
        "indefinite_quadratic",
        "--dim",
        "4",
        "--max-iter",
        "20",
    ]);
    assert_eq!(limited.status.code(), Some(1));
    assert_eq!(catopt(&["run", "--problem", "sphere", "--solver", "newton"]).status.code(), Some(2));
    assert_eq!(catopt(&["run", "--problem", "no_such_problem"]).status.code(), Some(2));
    assert_eq!(catopt(&["run", "--problem", "sphere", "--eps", "-1"]).status.code(), Some(2));
    assert_eq!(
        catopt(&["run", "--problem", "sphere", "--solver", "gd", "--classic-rho"]).status.code(),
        Some(2)
    );
    assert_eq!(catopt(&["--help"]).status.code(), Some(0));
}

#[test]
fn quadratic_file_run_with_trace() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.txt");
    fs::write(&path, "dim 2\n2 0\n0 4\n-2 -4\n1\n").unwrap();
    let trace = dir.path().join("trace.csv");
    let out = catopt(&[
        "run",
        "--quadratic-file",
        path.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("# cat-bench records v1\n"));
    assert!(stdout.contains("OPTIMAL"));
    let trace = fs::read_to_string(trace).unwrap();
    assert!(trace.starts_with("# cat-bench trace v1 trust-region\n"));
    assert_eq!(trace.lines().count(), 3, "header, columns and one Newton step");

    fs::write(&path, "dim 2\n1 0\n").unwrap();
    let bad = catopt(&["run", "--quadratic-file", path.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn bench_writes_readable_records() {
    let dir = tempfile::tempdir().unwrap();
    let out = catopt(&[
        "bench",
        "--suite",
        "sphere:3,rosenbrock:2",
        "--solvers",
        "cat,gd",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let records = read_records(&dir.path().join("records.csv")).unwrap();
    assert_eq!(records.len(), 4);
    assert!(records.iter().all(|r| r.solved()));
    let aggregates = fs::read_to_string(dir.path().join("aggregates.csv")).unwrap();
    assert!(aggregates.starts_with("# cat-bench aggregates v1 shift=1 max_iter=100000"));
}

#[test]
fn ablate_rejects_two_flags_and_runs_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let two = catopt(&["ablate", "--suite", "sphere:2", "--out-dir", d, "--classic-rho", "--fixed-initial-radius"]);
    assert_eq!(two.status.code(), Some(2));
    let one = catopt(&["ablate", "--suite", "rosenbrock:2", "--out-dir", d, "--classic-rho"]);
    assert_eq!(one.status.code(), Some(0));
    let records = read_records(&dir.path().join("records.csv")).unwrap();
    let solvers: Vec<_> = records.iter().map(|r| r.solver.as_str()).collect();
    assert_eq!(solvers, ["classic-rho", "default"]);
}
