use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use greenop::{exit_code, run};
use greenop_core::boundary::BoundaryProblem;
use greenop_core::Error;

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn cases() -> Vec<(String, Vec<String>, String)> {
    let mut out = Vec::new();
    let mut entries: Vec<_> = fs::read_dir(golden_dir()).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for path in entries {
        if path.extension().and_then(|e| e.to_str()) != Some("args") {
            continue;
        }
        let args = fs::read_to_string(&path).unwrap().lines().map(String::from).collect();
        let expected = fs::read_to_string(path.with_extension("out")).unwrap();
        out.push((path.file_stem().unwrap().to_string_lossy().into_owned(), args, expected));
    }
    out
}

fn binary(args: &[String]) -> (i32, String, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_greenop")).args(args).current_dir(env!("CARGO_MANIFEST_DIR")).output().unwrap();
    (o.status.code().unwrap_or(-1), String::from_utf8(o.stdout).unwrap(), String::from_utf8(o.stderr).unwrap())
}

fn call(args: &[&str]) -> greenop::Outcome {
    run(std::iter::once("greenop").chain(args.iter().copied()))
}

#[test]
fn golden_corpus_matches() {
    let cases = cases();
    assert!(cases.len() >= 19);
    for (name, args, expected) in cases {
        let (code, stdout, stderr) = binary(&args);
        assert_eq!(code, 0, "{}: {}", name, stderr);
        assert_eq!(stdout, expected, "{}", name);
    }
}

#[test]
fn golden_corpus_is_deterministic() {
    for (name, args, _) in cases() {
        assert_eq!(binary(&args), binary(&args), "{}", name);
    }
}

#[test]
fn error_exit_codes() {
    let parse = call(&["normalize", "D*(("]);
    assert_eq!(parse.code, 2);
    assert!(parse.stderr.contains("parse error at 4"));
    assert_eq!(call(&["solve", "D^2,[E[0]*D,E[1]*D]"]).code, 3);
    assert_eq!(call(&["solve", "D^2,[E[0],E[1]]", "--fundsys", "x,2*x"]).code, 4);
    assert_eq!(call(&["frobnicate"]).code, 2);
    assert_eq!(call(&["solve", "D^2,[E[0]]"]).code, 1);
    assert_eq!(exit_code(&Error::BudgetExceeded(10)), 5);
}

#[test]
fn spec_examples() {
    let solve = call(&["solve", "--op", "D^2", "--cond", "E[0]", "--cond", "E[1]"]);
    assert!(solve.stdout.contains("green: (x-1)*A*x + x*(R.A)*(x-1) - x*A*(x-1)\n"));
    assert!(solve.stdout.contains("kernel: g(x,ξ) = ξ(x-1) [ξ≤x]; x(ξ-1) [ξ>x]\n"));
    assert_eq!(call(&["normalize", "D*A"]).stdout, "1\n");
    assert_eq!(call(&["compose", "D,[E[0]]", "D,[E[0]]"]).stdout, "D^2, [E[0], E[0]*D]\n");
    assert_eq!(call(&["--format", "json", "normalize", "1"]).stdout, "{\"diff\":{\"0\":\"1\"},\"int\":[],\"boundary\":[]}\n");
    assert_eq!(call(&["normalize", "D*A - 1"]).stdout, "0\n");
    assert!(call(&["--format", "latex", "solve", "D^2,[E[0],E[1]]"]).stdout.contains("\\begin{cases}"));
}

#[test]
fn json_problems_round_trip_through_the_parsers() {
    let out = call(&["--format", "json", "compose", "D,[E[0]]", "D,[E[1]*A]"]);
    assert_eq!(out.code, 0);
    let p = BoundaryProblem::from_json(&out.stdout).unwrap();
    assert_eq!(p.render(), call(&["compose", "D,[E[0]]", "D,[E[1]*A]"]).stdout.trim_end());
    let v: serde_json::Value =
        serde_json::from_str(&call(&["--format", "json", "factor", "D^2,[E[0],E[1]]", "--left", "D", "--right", "D"]).stdout).unwrap();
    let left = BoundaryProblem::from_json(&v["left"].to_string()).unwrap();
    assert_eq!(left.render(), "D, [E[1]*A]");
}

#[test]
fn confluence_exit_status() {
    let out = call(&["confluence"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("baxter/baxter A*u*A*v*A : 0"));
    let traced = call(&["confluence", "--trace"]);
    assert!(traced.stdout.contains(" @ "));
    assert!(traced.stdout.ends_with("all residues zero: yes\n"));
}
