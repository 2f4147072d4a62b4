use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn igm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_igm")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn encode(dir: &TempDir, name: &str) -> String {
    let path = dir.path().join(format!("{name}.json"));
    let p = path.to_str().unwrap().to_string();
    let o = igm(&["encode-automaton", name, "-o", &p]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    p
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn decide_exit_codes() {
    let dir = TempDir::new().unwrap();
    let m = encode(&dir, "parity");
    assert_eq!(code(&igm(&["decide", "--machine", &m, "--word", "11"])), 0);
    assert_eq!(code(&igm(&["decide", "--machine", &m, "--word", "1"])), 1);
    assert_eq!(code(&igm(&["decide", "--machine", &m, "--word", ""])), 0);
    assert_eq!(code(&igm(&["decide", "--machine", &m, "--word", "0110", "--renamings", "5", "--seed", "7"])), 0);
    let bad = write(&dir, "bad.json", "{ not json");
    assert_eq!(code(&igm(&["decide", "--machine", &bad, "--word", "1"])), 2);
    assert_eq!(code(&igm(&["decide", "--machine", &m, "--word", "12"])), 2);
}

#[test]
fn decide_under_alternative_table() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("alt.json");
    let p = path.to_str().unwrap();
    assert_eq!(code(&igm(&["--psi", "alt", "encode-automaton", "zeros-ones", "-o", p])), 0);
    assert_eq!(code(&igm(&["--psi", "alt", "decide", "--machine", p, "--word", "0011"])), 0);
    assert_eq!(code(&igm(&["--psi", "alt", "decide", "--machine", p, "--word", "0101"])), 1);
}

#[test]
fn compare_packaged_automata() {
    let o = igm(&["compare", "parity", "--max-len", "6"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("127 words, all agree"), "{out}");
    let o = igm(&["--format", "json", "compare", "zeros-ones", "--max-len", "4"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let accepted: Vec<&str> =
        v["rows"].as_array().unwrap().iter().filter(|r| r["machine"] == "accept").map(|r| r["word"].as_str().unwrap()).collect();
    assert_eq!(accepted, vec!["", "01", "0011"]);
}

#[test]
fn compare_reports_malformed_halts() {
    let dir = TempDir::new().unwrap();
    let a = write(
        &dir,
        "halt.json",
        r#"{"heads": 1, "states": ["init", "go", "accept", "reject"], "transitions": [
            {"read": ["*"], "state": "init", "head": 1, "dir": "In", "next": "go"},
            {"read": ["0"], "state": "go", "next": "accept"}]}"#,
    );
    let o = igm(&["compare", &a, "--max-len", "2"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("halting transition"));
}

#[test]
fn roundtrip_modes() {
    let o = igm(&["roundtrip", "parity", "--max-len", "5", "--mode", "preamble"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = igm(&["roundtrip", "parity", "--max-len", "5", "--mode", "verbatim"]);
    assert!(stdout(&o).contains("agree"));
    let dir = TempDir::new().unwrap();
    let empty = write(&dir, "empty.json", r#"{"heads": 1, "states": ["init", "accept", "reject"], "transitions": []}"#);
    let o = igm(&["--format", "json", "roundtrip", &empty, "--max-len", "3"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["rows"].as_array().unwrap().iter().all(|r| r["original"] == "accept" && r["extracted"] == "accept"));
}

#[test]
fn encode_essentialize_extract_pipeline() {
    let dir = TempDir::new().unwrap();
    let m = encode(&dir, "not-leading-one");
    let e = dir.path().join("e.json");
    let a = dir.path().join("a.json");
    assert_eq!(code(&igm(&["essentialize", &m, "-o", e.to_str().unwrap()])), 0);
    let o = igm(&["extract-automaton", e.to_str().unwrap(), "--mode", "preamble", "-o", a.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(Path::new(&a).exists());
    assert_eq!(code(&igm(&["decide", "--machine", e.to_str().unwrap(), "--word", "01"])), 0);
    assert_eq!(code(&igm(&["decide", "--machine", e.to_str().unwrap(), "--word", "10"])), 1);
}

#[test]
fn correspond_reports_counts() {
    let o = igm(&["correspond", "zeros-ones", "--word", "01", "--max-steps", "12"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("steps\ttraces"));
}

const F: &str = r#"{"support": [{"line": ["0", "5"]}], "dialectSize": 1, "edges": [
    {"source": [{"line": ["0", "1"]}], "in": 0, "out": 0, "map": {"slope": "1", "offset": "1"}, "label": "a"},
    {"source": [{"line": ["2", "3"]}], "in": 0, "out": 0, "map": {"slope": "1", "offset": "-1"}, "label": "b"},
    {"source": [{"line": ["3", "4"]}], "in": 0, "out": 0, "map": {"slope": "1", "offset": "1"}, "label": "c"}]}"#;
const G: &str = r#"{"support": [{"line": ["1", "4"]}], "dialectSize": 1, "edges": [
    {"source": [{"line": ["3/2", "2"]}], "in": 0, "out": 0, "map": {"slope": "2", "offset": "-1"}, "label": "d"},
    {"source": [{"line": ["1", "3/2"]}], "in": 0, "out": 0, "map": {"slope": "2", "offset": "1"}, "label": "e"}]}"#;

#[test]
fn exec_paths_and_measure() {
    let dir = TempDir::new().unwrap();
    let (f, g) = (write(&dir, "f.json", F), write(&dir, "g.json", G));
    let o = igm(&["exec", &f, &g, "--cut", "1..4", "--max-len", "7"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["edges"].as_array().unwrap().len(), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("truncated"));
    let o = igm(&["paths", &f, &g, "--max-len", "3"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.as_array().unwrap().iter().any(|p| p["steps"] == serde_json::json!(["F0", "G1", "F2"])));
    let o = igm(&["measure", &f, &f]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "0");
    assert_eq!(code(&igm(&["exec", &f, &g, "--cut", "x"])), 2);
}
