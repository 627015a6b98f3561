use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ce-formality")).args(args).output().expect("binary runs")
}

fn run_on(args: &[&str], file: &str) -> (i32, Value) {
    let path = fixture(file);
    let mut all: Vec<&str> = args.to_vec();
    all.push(path.to_str().unwrap());
    let out = run(&all);
    let json: Value = serde_json::from_slice(&out.stdout).expect("json report");
    (out.status.code().unwrap(), json)
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(run(&["bogus"]).status.code(), Some(64));
    assert_eq!(run(&["formality"]).status.code(), Some(64));
    assert_eq!(run(&["--weight", "x", "euler", "a.json"]).status.code(), Some(64));
}

#[test]
fn help_and_version_exit_0() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("formality"));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn invalid_input_exits_1_with_witness() {
    let (code, r) = run_on(&["validate"], "bad.json");
    assert_eq!(code, 1);
    assert_eq!(r["result"]["first_failure"]["axiom"], "Leibniz");
    assert_eq!(r["result"]["first_failure"]["witness"], "(c, a)");
    let (code, r) = run_on(&["formality"], "bad.json");
    assert_eq!(code, 1);
    assert_eq!(r["status"], "invalid");
}

#[test]
fn missing_file_exits_1() {
    let out = run(&["validate", "/nonexistent/problem.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn small_bounds_exit_2() {
    let (code, r) = run_on(&["formality", "--columns", "2"], "hom_uu.json");
    assert_eq!(code, 2);
    assert_eq!(r["status"], "insufficient_bounds");
    let (code, _) = run_on(&["formality", "--weight", "6"], "gauge_formal.json");
    assert_eq!(code, 2);
}

#[test]
fn voronov_is_not_formal_at_r_2() {
    let (code, r) = run_on(&["formality", "--columns", "5", "--weight", "5"], "voronov.json");
    assert_eq!(code, 0);
    assert_eq!(r["result"]["verdict"], "NotFormal");
    assert_eq!(r["result"]["obstructions"]["first_nonzero"]["r"], 2);
    let (_, d) = run_on(&["derived-brackets"], "voronov.json");
    let text = d["result"].to_string();
    assert!(text.contains("\"-6\""), "{text}");
}

#[test]
fn two_dim_pages_stabilise() {
    let (code, r) = run_on(&["ce-pages", "--columns", "3", "--max-page", "3"], "two_dim.json");
    assert_eq!(code, 0);
    let pages = r["result"]["pages"].as_array().unwrap();
    assert_eq!(pages.len(), 4);
    assert_eq!(pages[2]["cells"], pages[3]["cells"]);
}

#[test]
fn reports_are_byte_identical() {
    for (cmd, file) in [("formality", "voronov.json"), ("ce-pages", "hom_uu.json"), ("mc-lift", "mc_series.json")] {
        let path = fixture(file);
        let a = run(&[cmd, path.to_str().unwrap()]);
        let b = run(&[cmd, path.to_str().unwrap()]);
        assert_eq!(a.stdout, b.stdout, "{cmd} {file}");
        let r: Value = serde_json::from_slice(&a.stdout).unwrap();
        assert_eq!(r["engine"]["name"], "ce-formality");
        assert_eq!(r["run_hash"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn every_command_runs_on_some_fixture() {
    let cases = [
        ("validate", "transfer_example.json", 0),
        ("cohomology", "hom_uu_ideal.json", 0),
        ("ce-pages", "end_acyclic.json", 0),
        ("euler", "hom_uu.json", 0),
        ("obstructions", "voronov.json", 0),
        ("minimal-model", "gauge_formal.json", 0),
        ("formality", "hom_uu_ideal.json", 0),
        ("transfer", "ideal_inclusion.json", 0),
        ("derived-brackets", "voronov.json", 0),
        ("kaledin", "voronov.json", 0),
        ("mc-check", "mc_gauge.json", 0),
        ("mc-lift", "mc_series.json", 0),
        ("quadraticity", "mc_lattice.json", 0),
    ];
    for (cmd, file, expected) in cases {
        let (code, r) = run_on(&[cmd], file);
        assert_eq!(code, expected, "{cmd} {file}: {r}");
        assert_eq!(r["command"], cmd);
        assert_eq!(r["status"], "ok");
    }
}

#[test]
fn text_format_is_plain() {
    let path = fixture("two_dim.json");
    let out = run(&["--format", "text", "cohomology", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.contains("status: ok"));
    assert!(serde_json::from_str::<Value>(&s).is_err());
}

#[test]
fn intrinsic_formality_fixture_is_formal() {
    let (code, r) = run_on(&["formality"], "hom_uu_ideal.json");
    assert_eq!(code, 0);
    assert_eq!(r["result"]["verdict"], "FormalUpTo");
    let (_, t) = run_on(&["transfer"], "abelian_inclusion.json");
    assert_eq!(t["result"]["conclusion"], "criterion_inconclusive");
}
