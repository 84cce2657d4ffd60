//! The `acg` binary as a process: output lines and exit codes.

mod common;

use std::process::{Command, Output};

use common::bench_dir;

fn acg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acg"))
        .args(args)
        .current_dir(bench_dir().parent().unwrap())
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn copy_sparse_is_proved() {
    let o = acg(&["analyze", "benchmarks/copy.acg", "--domain", "dbm", "--mode", "sparse"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "CHECK tail#1: PROVED"));
}

#[test]
fn first_nonnull_is_unknown() {
    let o = acg(&["analyze", "benchmarks/first_nonnull.acg", "--mode", "naive"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains(": UNKNOWN"));
}

#[test]
fn missing_file_is_an_input_error() {
    let o = acg(&["analyze", "missing.acg"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.acg"));
}

#[test]
fn bench_matches_golden() {
    let o = acg(&["bench", "benchmarks"]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{out}");
    assert!(out.contains("GOLDEN match"));
    let marked: Vec<&str> = out.lines().filter(|l| l.contains('†')).map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(marked, ["first_nonnull", "partition_hp08"]);
}

#[test]
fn orderings_and_help() {
    assert_eq!(stdout(&acg(&["orderings", "3"])).trim(), "222");
    assert_eq!(stdout(&acg(&["orderings", "3", "--distinguish-zero"])).trim(), "333");
    let h = acg(&["--help"]);
    assert_eq!(h.status.code(), Some(0));
    for cmd in ["analyze", "bench", "orderings", "relax-poly"] {
        assert!(stdout(&h).contains(cmd));
    }
}

#[test]
fn interval_domain_runs() {
    let o = acg(&["analyze", "benchmarks/extra/init_rand_2_const.acg", "--domain", "interval", "--widen-delay", "0"]);
    assert!(matches!(o.status.code(), Some(0 | 1)));
    assert!(stdout(&o).starts_with("OPTIONS domain=interval"));
}
