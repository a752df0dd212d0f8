//! End-to-end runs of the binary.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphstar"))
        .args(args)
        .env_remove("GRAPHSTAR_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn counts_the_five_classes_of_weight_two() {
    let out = run(&["graphs", "--weight", "2", "--output", "count"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "5");
}

#[test]
fn lists_the_single_edge_class() {
    let out = run(&["graphs", "--weight", "1", "--output", "list"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "weights=[] edges=[0->1] auts=1");
}

#[test]
fn emits_the_first_order_operator_in_latex() {
    let out = run(&["graphs", "--weight", "1", "--output", "latex"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains(r"g^{\bar q_{1} p_{1}}"), "{text}");
    assert!(text.contains(r"\bar\partial_{q_{1}} f_{1}"), "{text}");
}

#[test]
fn level_guard_requires_explicit_opt_in() {
    let out = run(&["graphs", "--weight", "5", "--output", "count"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("--allow-large"), "{}", stderr(&out));
}

#[test]
fn flat_product_of_conjugate_coordinates() {
    let out = run(&[
        "star", "--chart", "flat", "--f1", "zb1", "--f2", "z1", "--point", "0.5", "--order", "2",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        stdout(&out),
        "h^0: 0.250000000000+0.000000000000i\n\
         h^1: 1.000000000000+0.000000000000i\n\
         h^2: 0.000000000000+0.000000000000i\n"
    );
}

#[test]
fn json_orders_are_machine_readable() {
    let out = run(&[
        "star", "--chart", "flat", "--f1", "zb1", "--f2", "z1", "--point", "0.5", "--order", "1",
        "--output", "json", "--filter",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let lines: Vec<serde_json::Value> = stdout(&out)
        .lines()
        .map(|l| serde_json::from_str(l).expect("valid json"))
        .collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1]["order"], 1);
    assert!((lines[1]["re"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn chart_files_load_by_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bumpy.json");
    std::fs::write(
        &path,
        r#"{"name":"bumpy","dimension":1,"potentials":{"-1":"z1*zb1 + 0.1*z1^2*zb1^2"}}"#,
    )
    .unwrap();
    let out = run(&[
        "star", "--chart", path.to_str().unwrap(), "--f1", "zb1", "--f2", "z1", "--point", "0.1",
        "--order", "0",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "h^0: 0.010000000000+0.000000000000i");
}

#[test]
fn point_dimension_is_checked() {
    let out = run(&[
        "star", "--chart", "flat", "--dimension", "2", "--f1", "z1", "--f2", "zb2", "--point",
        "0.5", "--order", "1",
    ]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("dimension 2"), "{}", stderr(&out));
}

#[test]
fn cache_directory_is_written_and_reused() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let first = run(&["graphs", "--weight", "3", "--output", "count", "--cache-dir", cache]);
    assert!(first.status.success(), "{}", stderr(&first));
    assert_eq!(stdout(&first).trim(), "42");
    let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert!(!files.is_empty(), "cache directory stayed empty");
    let second = run(&["graphs", "--weight", "3", "--output", "count", "--cache-dir", cache]);
    assert!(second.status.success(), "{}", stderr(&second));
    assert_eq!(stdout(&second).trim(), "42");
}

#[test]
fn verify_selection_emits_json_without_runtimes() {
    let out = run(&["verify", "--only", "determinism", "--json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let report: serde_json::Value = serde_json::from_str(text.trim()).expect("valid json");
    assert_eq!(report["name"], "determinism");
    assert_eq!(report["pass"], true);
    assert!(report.get("runtime").is_none());
}

#[test]
fn verify_rejects_unknown_check_names() {
    let out = run(&["verify", "--only", "no-such-check"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("no-such-check"), "{}", stderr(&out));
}

#[test]
fn verify_runs_are_reproducible() {
    let args = ["verify", "--only", "flat-factorial", "--json", "--seed", "3"];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success(), "{}", stderr(&first));
    assert_eq!(stdout(&first), stdout(&second));
}
