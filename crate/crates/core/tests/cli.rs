// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metareduce"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn params_prints_sizes() {
    let toy = data("toy.json");
    let o = run(&["params", "--gamma", &toy, "--sat", "x1", "--free", "--L", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    for line in ["s=1", "2^s=2", "L=2", "T=16", "N=4"] {
        assert!(text.lines().any(|l| l == line), "missing {line} in {text}");
    }
    let o = run(&["params", "--gamma", &data("toy_uniform.json"), "--sat", "x1 | x2", "--uniform"]);
    assert!(stdout(&o).contains("T=64\nN=6"), "{}", stdout(&o));
    let o = run(&["params", "--gamma", &toy, "--sat", "x1", "--L", "1"]);
    assert!(stdout(&o).contains("T=14\nN=none"));
}

#[test]
fn check_reports_equivalence() {
    let o = run(&["check", "--gamma", &data("toy.json"), "--sat", &data("s.cnf"), "--mode", "det", "--L", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "EQUIVALENT (16 configurations)\n");
    let o = run(&[
        "check", "--gamma", &data("ntoy.json"), "--sat", &data("xor.cnf"), "--mode", "nondet", "--L", "1", "--jobs", "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "EQUIVALENT (18 configurations)\n");
}

#[test]
fn uniform_mode_rejects_non_power_totals() {
    let o = run(&["compile", "--gamma", &data("toy.json"), "--sat", "x1", "--uniform"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not a power of 2"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn usage_errors_exit_two() {
    let toy = data("toy.json");
    for args in [
        vec!["frobnicate"],
        vec!["params", "--gamma", &toy],
        vec!["params", "--gamma", &toy, "--sat", "x1", "--free"],
        vec!["params", "--gamma", &toy, "--sat", "x1", "--mode", "both"],
        vec!["params", "--gamma", &toy, "--sat", "x1", "--uniform", "--L", "2"],
        vec!["eval", "--config", "1"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn domain_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, r#"{"q":2}"#).unwrap();
    let broken = broken.to_string_lossy().into_owned();
    for args in [
        vec!["params", "--gamma", broken.as_str(), "--sat", "x1", "--L", "1"],
        vec!["check", "--gamma", &data("ntoy.json"), "--sat", "x1", "--L", "1"],
        vec!["params", "--gamma", "/nonexistent/gamma.json", "--sat", "x1", "--L", "1"],
        vec!["params", "--gamma", &data("toy.json"), "--sat", "x1 &", "--L", "1"],
        vec!["mso", "--graph", &data("toy.json"), "--formula", "exists x (x -> y)"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).starts_with("error: "), "{}", stderr(&o));
    }
}

#[test]
fn compile_eval_and_enumerate_agree_with_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = dir.path().join("c.json");
    let stats = dir.path().join("stats.json");
    let toy = data("toy.json");
    let o = run(&[
        "compile",
        "--gamma",
        &toy,
        "--sat",
        "x1",
        "--L",
        "2",
        "-o",
        circuit.to_str().unwrap(),
        "--emit-stats",
        stats.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stats: Value = serde_json::from_str(&std::fs::read_to_string(&stats).unwrap()).unwrap();
    for key in ["gates", "wires", "peak_workspace_bytes", "emission_time"] {
        assert!(stats.get(key).is_some(), "{key}");
    }
    let c = circuit.to_str().unwrap();
    assert_eq!(stdout(&run(&["eval", "--circuit", c, "--config", "4"])), "4\n");
    assert_eq!(stdout(&run(&["eval", "--circuit", c, "--config", "15"])), "9\n");
    assert_eq!(stdout(&run(&["eval", "--gamma", &toy, "--sat", "x1", "--L", "2", "--config", "1"])), "2\n");
    let o = run(&["eval", "--circuit", c, "--config", "16"]);
    assert_eq!(o.status.code(), Some(1));

    let from_file = run(&["enumerate", "--circuit", c, "--format", "arcs"]);
    let oracle = run(&["oracle", "--gamma", &toy, "--sat", "x1", "--L", "2", "--format", "arcs"]);
    assert_eq!(stdout(&from_file), stdout(&oracle));
    assert_eq!(stdout(&from_file).lines().count(), 16);
    let bounded = run(&["enumerate", "--circuit", c, "--bound", "8"]);
    assert_eq!(bounded.status.code(), Some(1));
}

#[test]
fn nondeterministic_eval() {
    let args = |c: &str, d: &str| {
        let o = run(&[
            "eval", "--gamma", &data("ntoy.json"), "--sat", "x1", "--L", "2", "--mode", "nondet", "--config", c, "--config2", d,
        ]);
        stdout(&o)
    };
    // the G0 copy holds both 4 -> 4 and 4 -> 5
    assert_eq!(args("4", "4"), "1\n");
    assert_eq!(args("4", "5"), "1\n");
    assert_eq!(args("4", "6"), "0\n");
    let o = run(&["eval", "--gamma", &data("ntoy.json"), "--sat", "x1", "--L", "2", "--mode", "nondet", "--config", "4"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn mso_on_dot_and_circuit_files() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("d.dot");
    let toy = data("toy.json");
    let o = run(&["oracle", "--gamma", &toy, "--sat", "x1 & !x1", "--L", "2", "-o", dot.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["mso", "--graph", dot.to_str().unwrap(), "--formula", "exists x (x -> x)"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"], Value::Bool(false));
    assert!(v.get("witness").is_none());

    let circuit = dir.path().join("c.json");
    run(&["compile", "--gamma", &toy, "--sat", "x1", "--L", "2", "-o", circuit.to_str().unwrap()]);
    let o = run(&["mso", "--graph", circuit.to_str().unwrap(), "--formula", "exists x: x -> x"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"], Value::Bool(true));
    assert_eq!(v["witness"], serde_json::json!([["x", 4]]));

    let o = run(&["mso", "--graph", dot.to_str().unwrap(), "--formula", "exists X (exists x (x in X))", "--budget", "1000"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("budget"), "{}", stderr(&o));
}

#[test]
fn rice_and_stats_emit_json() {
    let o = run(&["rice", "--gamma", &data("toy.json"), "--sat", &data("xor.cnf"), "--L", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["agree"], Value::Bool(true));
    assert_eq!(v["satisfiable"], Value::Bool(true));
    let o = run(&["stats", "--gamma", &data("toy.json"), "--sat", "x1", "--L", "2", "--mode", "nondet"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["gates"].as_u64().unwrap() > 0);
}

#[test]
fn compile_output_is_deterministic() {
    let args = ["compile", "--gamma", &data("toy.json"), "--sat", &data("xor.cnf"), "--L", "2", "--mode", "nondet"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

/// Rewrites a compiled circuit file and checks that `check --circuit`
/// catches the change.
#[test]
fn check_rejects_mutated_circuits() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let toy = data("toy.json");
    run(&["compile", "--gamma", &toy, "--sat", "x1", "--L", "2", "-o", path.to_str().unwrap()]);
    let original: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let base = ["check", "--gamma", toy.as_str(), "--sat", "x1", "--L", "2", "--circuit"];

    let o = run(&[&base[..], &[path.to_str().unwrap()]].concat());
    assert_eq!(stdout(&o), "EQUIVALENT (16 configurations)\n");

    let mut mutants = Vec::new();
    let mut reversed = original.clone();
    reversed["output_order"].as_array_mut().unwrap().reverse();
    mutants.push(reversed);
    let mut grounded = original.clone();
    let gates = grounded["gates"].as_array_mut().unwrap();
    let zero = gates.iter().find(|g| g["kind"] == "const0").unwrap()["id"].clone();
    let first_output = gates.iter_mut().find(|g| g["kind"] == "output").unwrap();
    first_output["args"] = serde_json::json!([zero]);
    mutants.push(grounded);

    for (k, mutant) in mutants.iter().enumerate() {
        let p = dir.path().join(format!("m{k}.json"));
        std::fs::write(&p, serde_json::to_string(mutant).unwrap()).unwrap();
        let o = run(&[&base[..], &[p.to_str().unwrap()]].concat());
        assert_eq!(o.status.code(), Some(1), "mutant {k}: {}", stdout(&o));
        assert!(stdout(&o).starts_with("MISMATCH at configuration"), "{}", stdout(&o));
    }
}
