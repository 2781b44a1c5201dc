use std::io::Write;
use std::process::{Command, Stdio};

fn programs(name: &str) -> String {
    format!("{}/../../programs/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn fxcalc(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_fxcalc")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn json(args: &[&str]) -> (i32, serde_json::Value) {
    let mut a = args.to_vec();
    a.push("--json");
    let (code, out) = fxcalc(&a);
    let v = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{args:?}: {e}\n{out}"));
    (code, v)
}

#[test]
fn run_prints_the_normal_form() {
    assert_eq!(fxcalc(&["run", &programs("state.eff")]), (0, "tru\n".into()));
    assert_eq!(fxcalc(&["run", &programs("state.mam")]), (0, "<tru, fls>\n".into()));
    assert_eq!(fxcalc(&["run", &programs("state.mon")]), (0, "<tru, fls>\n".into()));
    assert_eq!(fxcalc(&["run", &programs("state.del")]), (0, "tru\n".into()));
}

#[test]
fn run_reports_fuel_and_traces() {
    let (code, out) = fxcalc(&["run", &programs("state.mam"), "--fuel", "3"]);
    assert_eq!(code, 1);
    assert!(out.starts_with("out of fuel"));
    let (code, v) = json(&["run", &programs("tick.eff"), "--trace"]);
    assert_eq!(code, 0);
    assert_eq!(v["status"]["value"], "tru");
    assert!(v["steps"].as_array().unwrap().len() > 5);
}

#[test]
fn check_reports_types_and_errors() {
    let (code, out) = fxcalc(&["check", &programs("state.mon")]);
    assert_eq!(code, 0);
    assert!(out.contains("get : U[State] F bit\n"), "{out}");
    let (code, v) = json(&["check", &programs("reader_counterexample.eff")]);
    assert_eq!(code, 1);
    assert_eq!(v["ok"], false);
    assert_eq!(v["error"]["kind"], "type");
}

#[test]
fn translate_then_run() {
    let dir = std::env::temp_dir().join(format!("fxcalc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("state.mon");
    let out = out.to_str().unwrap();
    assert_eq!(fxcalc(&["translate", &programs("state.del"), "--to", "mon", "-o", out]).0, 0);
    assert_eq!(fxcalc(&["check", out]).0, 0);
    assert_eq!(fxcalc(&["run", out]), (0, "tru\n".into()));
    let (code, v) = json(&["translate", &programs("state.eff"), "--to", "mon", "--variant", "free-monad"]);
    assert_eq!(code, 0);
    assert!(v["program"].as_str().unwrap().starts_with("main = "));
}

#[test]
fn simulate_emits_a_report() {
    let (code, v) = json(&["simulate", &programs("state.del"), "--to", "eff"]);
    assert_eq!(code, 0);
    assert_eq!(v["mode"], "exact");
    assert!(!v["steps"].as_array().unwrap().is_empty());
    let (code, v) = json(&["simulate", &programs("state.eff"), "--to", "del", "--variant", "nested"]);
    assert_eq!(code, 0);
    assert_eq!(v["mode"], "up-to-congruence");
}

#[test]
fn denote_laws_and_pigeonhole() {
    let (code, out) = fxcalc(&["denote", &programs("state.mon"), "--type", "U[State] F bit"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("U[State] F bit has 16 elements"), "{out}");
    let (code, v) = json(&["denote", &programs("state.mam")]);
    assert_eq!((code, v["main"].as_str()), (0, Some("<tru, fls>")));
    let (code, v) = json(&["laws", &programs("state.mon"), "--sizes", "0,1"]);
    assert_eq!(code, 0);
    assert_eq!(v["monads"][0]["report"]["verdict"], "proper-at-tested-sizes");
    let (code, v) = json(&["pigeonhole", "--k", "2", "--target", "U[] F bit"]);
    assert_eq!(code, 0);
    assert_eq!(v["cardinality"], "2");
    assert_eq!(v["pairs"].as_array().unwrap().len(), 3);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(fxcalc(&["frobnicate"]).0, 2);
    assert_eq!(fxcalc(&["run"]).0, 2);
    let (code, v) = json(&["translate", &programs("state.mam"), "--to", "eff"]);
    assert_eq!((code, v["error"]["kind"].as_str()), (2, Some("usage")));
    let (code, v) = json(&["simulate", &programs("state.eff"), "--to", "nowhere"]);
    assert_eq!((code, v["ok"].as_bool()), (2, Some(false)));
    assert_eq!(json(&["denote", &programs("state.mon"), "--type", "bit", "--assign", "a"]).0, 2);
    assert_eq!(json(&["run", "-"]).0, 2);
}

#[test]
fn reads_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_fxcalc"))
        .args(["run", "-", "--calculus", "del"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"main = reset shift0 k -> force k tru as x in return x").unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "tru\n");
}

#[test]
fn missing_files_and_parse_errors_exit_1() {
    let (code, v) = json(&["run", "does-not-exist.eff"]);
    assert_eq!((code, v["error"]["kind"].as_str()), (1, Some("io")));
    let dir = std::env::temp_dir();
    let bad = dir.join(format!("fxcalc-bad-{}.mam", std::process::id()));
    std::fs::write(&bad, "main = return (").unwrap();
    let (code, v) = json(&["check", bad.to_str().unwrap()]);
    assert_eq!((code, v["error"]["kind"].as_str()), (1, Some("parse")));
}
