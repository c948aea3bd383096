use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn aara(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aara")).current_dir(root()).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("aara-cli-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d.join(name)
}

#[test]
fn analyze_prints_the_swap_bound() {
    let o = aara(&["analyze", "bench/swap.ml"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("swap: log|x|"), "{out}");
    assert!(out.contains("Φ(v) = φ(v)"), "{out}");
}

#[test]
fn golden_files_match() {
    for name in ["swap", "id"] {
        let o = aara(&["check", &format!("bench/{name}.ml"), "--expect", &format!("golden/{name}.json")]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
    }
}

#[test]
fn tampered_golden_fails() {
    let text = std::fs::read_to_string(root().join("golden/swap.json")).unwrap();
    let bad = scratch("swap.json");
    std::fs::write(&bad, text.replacen("\"coeff\": \"1\"", "\"coeff\": \"1/2\"", 1)).unwrap();
    let o = aara(&["check", "bench/swap.ml", "--expect", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn unsat_program_exits_one_with_a_core() {
    let o = aara(&["analyze", "bench/unsat.ml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("\nunsat: "), "{}", stdout(&o));
}

#[test]
fn json_report_and_proof_tree() {
    let (json, html) = (scratch("r.json"), scratch("t.html"));
    let o = aara(&["analyze", "bench/swap.ml", "--json", json.to_str().unwrap(), "--proof-html", html.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["schema"], "aara-report/1");
    assert_eq!(v["objective"], "4");
    assert_eq!(v["stats"]["certificate_failures"], 0);
    let page = std::fs::read_to_string(&html).unwrap();
    assert!(page.contains("<details") && page.contains("swap"));
}

#[test]
fn eval_reports_cost() {
    let o = aara(&["eval", "bench/swap.ml", "--fn", "swap", "--input", "(node (node leaf 1 leaf) 2 leaf)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "value: node leaf 2 (node leaf 1 leaf)\ncost: 1\n");
}

#[test]
fn dump_smt_is_deterministic() {
    let a = aara(&["dump-smt", "bench/swap.ml"]);
    let b = aara(&["dump-smt", "bench/swap.ml"]);
    assert_eq!(a.status.code(), Some(0));
    assert!(stdout(&a).contains("(minimize"));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn bad_input_is_a_tool_error() {
    assert_eq!(aara(&["analyze", "bench/nope.ml"]).status.code(), Some(2));
    assert_eq!(aara(&["eval", "bench/swap.ml", "--fn", "swap", "--input", "(leaf"]).status.code(), Some(2));
    assert_eq!(aara(&["analyze", "bench/swap.ml", "--lang", "quux"]).status.code(), Some(2));
}
