//! Black-box tests of the `predsched` binary: exit codes, formats, config files.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_predsched")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("predsched-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

#[test]
fn generate_is_deterministic_and_parseable() {
    let a = run(&["generate", "--n", "12", "--seed", "9"]);
    let b = run(&["generate", "--n", "12", "--seed", "9"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let inst = predsched_core::model::Instance::parse(&text).unwrap();
    assert_eq!(inst.n(), 12);
    assert_eq!(inst.machines(), 1);
}

#[test]
fn generate_unrelated_env() {
    let out = tmp("gen-unrelated.txt");
    let s = run(&[
        "generate", "--n", "6", "--m", "3", "--env", "unrelated", "--seed", "2", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(s.status.success());
    let inst = predsched_core::model::Instance::parse(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(inst.machines(), 3);
}

#[test]
fn verify_succeeds_with_exit_zero() {
    let out = run(&["verify", "lemmas", "--seed", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("lemma-identity: ok"));
}

#[test]
fn usage_errors_exit_two() {
    let unknown = run(&["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2));
    let bad_env = run(&["generate", "--env", "quantum"]);
    assert_eq!(bad_env.status.code(), Some(2));
    let missing_out = run(&["sensitivity", "--n", "5"]);
    assert_eq!(missing_out.status.code(), Some(2));
    let bad_suite = run(&["verify", "nonsense"]);
    assert_eq!(bad_suite.status.code(), Some(2));
}

#[test]
fn sensitivity_writes_csv_and_svg() {
    let csv = tmp("sens.csv");
    let svg = tmp("sens.svg");
    let s = run(&[
        "sensitivity", "--n", "10", "--runs", "2", "--omegas", "0,1", "--seed", "5", "--out",
        csv.to_str().unwrap(), "--svg", svg.to_str().unwrap(),
    ]);
    assert!(s.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "experiment,distribution,n,m,algorithm,lambda,x,run,seed,objective,baseline,ratio,eta_s,ell1"
    );
    // 2 algorithms x 2 noise levels x 2 runs.
    assert_eq!(lines.count(), 8);
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn config_file_matches_equivalent_flags() {
    let cfg = tmp("exp.cfg");
    std::fs::write(
        &cfg,
        "env = identical\nm = 2\nn = 8\nruns = 2\nomegas = 0, 2\nalgos = wdeq, pts(pwspt,wdeq,0.5)\nseed = 11\n",
    )
    .unwrap();
    let from_file = tmp("from-file.csv");
    let s = run(&["sensitivity", "--config", cfg.to_str().unwrap(), "--out", from_file.to_str().unwrap()]);
    assert!(s.status.success(), "{}", String::from_utf8_lossy(&s.stderr));
    let from_flags = tmp("from-flags.csv");
    let s = run(&[
        "sensitivity", "--env", "identical", "--m", "2", "--n", "8", "--runs", "2", "--omegas",
        "0,2", "--algos", "wdeq,pts(pwspt,wdeq,0.5)", "--seed", "11", "--out",
        from_flags.to_str().unwrap(),
    ]);
    assert!(s.status.success());
    assert_eq!(std::fs::read(&from_file).unwrap(), std::fs::read(&from_flags).unwrap());
}

#[test]
fn online_then_plot_round_trips() {
    let csv = tmp("online.csv");
    let s = run(&[
        "online", "--n", "10", "--runs", "2", "--rounds", "3", "--seed", "4", "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(s.status.success());
    let svg = tmp("online.svg");
    let s = run(&["plot", "--input", csv.to_str().unwrap(), "--out", svg.to_str().unwrap()]);
    assert!(s.status.success());
    let svg_text = std::fs::read_to_string(&svg).unwrap();
    assert!(svg_text.contains("round"));

    let bad = tmp("bad.csv");
    std::fs::write(&bad, "not,a,valid,header\n").unwrap();
    let s = run(&["plot", "--input", bad.to_str().unwrap(), "--out", svg.to_str().unwrap()]);
    assert_eq!(s.status.code(), Some(2));
}
