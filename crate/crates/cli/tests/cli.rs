use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn nsx(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_nsx"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn nsx");
    let mut pipe = child.stdin.take().unwrap();
    if let Some(text) = stdin {
        pipe.write_all(text.as_bytes()).unwrap();
    }
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn example(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("examples")
        .join(name)
        .display()
        .to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn translate_standardness_from_stdin() {
    let o = nsx(&["translate", "-"], Some("(st x)"));
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "(exists-st ((y N)) (=0 y x))");
}

#[test]
fn normalize_with_trace() {
    let o = nsx(&["normalize", &example("unif_cont.nsx"), "--trace"], None);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(
        v["normal_form"],
        "(with ((f (-> (-> N N) N N))) (forall-st ((k N)) (exists-st ((N N)) (forall ((x (-> N N)) (y (-> N N))) \
         (implies (and (atom unit x) (atom unit y)) (implies (atom near x y N) (atom near (app f x) (app f y) k)))))))"
    );
    let rules: Vec<&str> = v["trace"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["rule"].as_str().unwrap())
        .collect();
    assert_eq!(rules.first(), Some(&"expand"));
    assert!(rules.contains(&"idealize"), "{rules:?}");
}

#[test]
fn extract_then_verify_with_wider_domain() {
    let out = tmp("unif_cont.json");
    let o = nsx(
        &[
            "extract",
            &example("unif_cont.nsp"),
            "-o",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["witness"].as_str().unwrap().starts_with("(lam (k N)"));
    assert!(v["trace"]
        .as_array()
        .unwrap()
        .iter()
        .any(|s| s["rule"] == "realize"));

    let o = nsx(
        &[
            "verify",
            out.to_str().unwrap(),
            "--domain",
            "k=1..64",
            "--json",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["report"]["checked"], 64);
    assert_eq!(r["report"]["status"], "pass");
}

#[test]
fn verify_pipeline_directly() {
    let o = nsx(&["verify", &example("unif_cont.nsp")], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("pass: 32 checks, 0 failures"));
}

#[test]
fn false_contract_exits_one() {
    let path = tmp("false.json");
    std::fs::write(
        &path,
        r#"{"contract": "(forall ((k N)) (<=0 k 2))", "domain": ["k=0..5"]}"#,
    )
    .unwrap();
    let o = nsx(&["verify", path.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("fail: 6 checks, 3 failures"));
}

#[test]
fn usage_and_parse_errors_exit_two() {
    assert_eq!(nsx(&["translate", "-"], Some("(st")).status.code(), Some(2));
    assert_eq!(
        nsx(&["parse", "/nonexistent.nsx"], None).status.code(),
        Some(2)
    );
    assert_eq!(
        nsx(&["--fuel", "0", "registry"], None).status.code(),
        Some(2)
    );
    assert_eq!(nsx(&["frobnicate"], None).status.code(), Some(2));
    let o = nsx(&["demo", "nope"], None);
    assert_ne!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown demo"));
}

#[test]
fn parse_prints_terms_with_types() {
    let o = nsx(&["parse", "-"], Some("(lam (x N) (succ x))"));
    assert_eq!(stdout(&o).trim(), "(lam (x N) (succ x)) : (-> N N)");
    let o = nsx(
        &["parse", "-"],
        Some("(forall-st ((x N)) (exists-st ((y N)) (=0 x y)))"),
    );
    assert_eq!(
        stdout(&o).trim(),
        "(forall-st ((x N)) (exists-st ((y N)) (=0 x y)))"
    );
}

#[test]
fn fan_demo_passes() {
    let o = nsx(&["demo", "stp-fan", "--json"], None);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 6);
}

#[test]
fn continuity_demo_passes() {
    let o = nsx(&["demo", "continuity"], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verification: pass (3264 checks, 0 failures)"));
}

#[test]
fn registry_lists_definitions() {
    let o = nsx(&["registry", "--json"], None);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let names: Vec<&str> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    for n in ["ns-continuity", "ns-integrability", "STP", "MU", "SCF"] {
        assert!(names.contains(&n), "{n}");
    }
}

#[test]
fn sweep_is_reproducible() {
    let a = nsx(&["sweep", "--count", "40", "--seed", "11", "--json"], None);
    let b = nsx(&["sweep", "--count", "40", "--seed", "11", "--json"], None);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["not_fixed"].as_array().unwrap().len(), 0);
}
