use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn flatfix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flatfix")).args(args).env_remove("FLATFIX_FORMAT").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn edited(name: &str, edit: impl FnOnce(&mut Value)) -> tempfile::NamedTempFile {
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap();
    edit(&mut doc);
    let file = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(file.path(), serde_json::to_string(&doc).unwrap()).unwrap();
    file
}

#[test]
fn compute_klein() {
    let out = flatfix(&["compute", "--invariant", "all", fixture("klein.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["lefschetz"], "1");
    assert_eq!(v["nielsen"], "1");
    assert_eq!(v["trace"].as_array().unwrap().len(), 1);
    assert_eq!(v["trace"][0]["coefficient"], "1");
    assert_eq!(v["diagnostics"]["index_pi_gamma"], "2");
}

#[test]
fn single_invariant() {
    let out = flatfix(&["compute", "--invariant", "nielsen", fixture("hantzsche_wendt_times3.json").to_str().unwrap()]);
    let v = json(&out);
    assert_eq!(v["nielsen"], "26");
    assert!(v.get("lefschetz").is_none());
    assert!(v.get("trace").is_none());
}

#[test]
fn broken_relator_exits_one() {
    let out = flatfix(&["validate", fixture("klein_broken_relator.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["valid"], false);
    assert!(v["violations"].as_array().unwrap().iter().any(|m| m.as_str().unwrap().contains("b*b = b2")));
    let out = flatfix(&["compute", fixture("klein_broken_relator.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("b*b = b2"));
}

#[test]
fn compare_klein_text() {
    let out = flatfix(&["compare", "--format", "text", fixture("klein.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("algebraic == geometric"));
}

#[test]
fn format_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_flatfix"))
        .args(["compute", fixture("circle_two_valued.json").to_str().unwrap()])
        .env("FLATFIX_FORMAT", "text")
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("lefschetz  -1\n"));
}

#[test]
fn output_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let input = fixture("torus2_three_branch.json");
    for (path, threads) in [(&a, "1"), (&b, "4")] {
        let out = flatfix(&["compare", input.to_str().unwrap(), "--threads", threads, "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn oracle_needs_a_lift() {
    let file = edited("klein.json", |d| {
        d.as_object_mut().unwrap().remove("lift");
    });
    let out = flatfix(&["oracle", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn truncated_bound_is_a_mismatch() {
    let file = edited("torus1_5.json", |d| {
        d["options"] = serde_json::json!({"oracle_bound": 0, "bound_check": false});
    });
    let out = flatfix(&["compare", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    assert_eq!(v["comparison"]["agree"], false);
}

#[test]
fn degenerate_lift_exits_two() {
    let file = edited("torus2_diag_2_3.json", |d| {
        d["morphism"]["images"]["e1"]["components"][0]["translation"] = serde_json::json!(["1", "0"]);
        d["morphism"]["images"]["e2"]["components"][0]["translation"] = serde_json::json!(["0", "1"]);
        d["lift"]["branches"][0]["matrix"] = serde_json::json!([["1", "0"], ["0", "1"]]);
    });
    let out = flatfix(&["oracle", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreadable_or_malformed_input_exits_four() {
    let out = flatfix(&["compute", "/nonexistent/input.json"]);
    assert_eq!(out.status.code(), Some(4));
    let file = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(file.path(), "{ not json").unwrap();
    let out = flatfix(&["compute", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}
