//! End-to-end runs of the `sosps` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sosps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sosps")).args(args).env_remove("SOSPS_JOBS").output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

const PAIR: &str = r#"{"n":1,"eqs":["x1","~x1"]}"#;
const PAIR_PROOF: &str = r#"{"n":1,"target":"-1","multipliers":[{"j":1,"t":"-1"},{"j":2,"t":"-1"}]}"#;

#[test]
fn gen_then_degree_on_knapsack() {
    let dir = tempfile::tempdir().unwrap();
    let inst = path(dir.path(), "ks.json");
    let out = sosps(&["gen", "--family", "knapsack", "--n", "1", "--k", "1", "--out", &inst]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_str(&fs::read_to_string(&inst).unwrap()).unwrap();
    assert_eq!(doc["id"], "ks-1-1");

    let pf = path(dir.path(), "ks.proof.json");
    let out = sosps(&["degree", &inst, "--dmax", "4", "--proof-out", &pf]);
    assert_eq!(code(&out), 0);
    let rep = stdout_json(&out);
    assert_eq!(rep["degree"], 2);
    assert_eq!(rep["exact"], true);
    // the exported refutation verifies through the other subcommand
    let out = sosps(&["verify", &inst, &pf]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["valid"], true);
}

#[test]
fn satisfiable_knapsack_has_no_refutation() {
    let dir = tempfile::tempdir().unwrap();
    let inst = path(dir.path(), "ks.json");
    assert_eq!(code(&sosps(&["gen", "--family", "knapsack", "--n", "2", "--k", "2", "--out", &inst])), 0);
    let out = sosps(&["degree", &inst, "--dmax", "4"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["degree"], Value::Null);
}

#[test]
fn verify_reports_measures_and_rejects_a_broken_proof() {
    let dir = tempfile::tempdir().unwrap();
    let sys = path(dir.path(), "pair.json");
    let pf = path(dir.path(), "pair.proof.json");
    fs::write(&sys, PAIR).unwrap();
    fs::write(&pf, PAIR_PROOF).unwrap();
    let out = sosps(&["verify", &sys, &pf]);
    assert_eq!(code(&out), 0);
    let rep = stdout_json(&out);
    assert_eq!(
        (rep["valid"].as_bool(), rep["degree"].as_u64(), rep["monomial_size"].as_u64()),
        (Some(true), Some(1), Some(2))
    );

    fs::write(&pf, PAIR_PROOF.replace(r#""t":"-1"}]"#, r#""t":"-2"}]"#)).unwrap();
    let out = sosps(&["verify", &sys, &pf]);
    assert_eq!(code(&out), 4);
    assert_eq!(stdout_json(&out)["valid"], false);
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(code(&sosps(&["verify", "/no/such/system.json", "/no/such/proof.json"])), 2);
    assert_eq!(code(&sosps(&["gen", "--family", "knapsack", "--n", "2"])), 2);
    assert_eq!(code(&sosps(&["gen", "--family", "nonsense", "--n", "2"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let cfg = path(dir.path(), "bad.json");
    fs::write(&cfg, r#"{"study":{"family":"knapsack","n":[1],"k":[1]},"degrees":[3]}"#).unwrap();
    assert_eq!(code(&sosps(&["experiment", &cfg])), 2);
}

#[test]
fn bound_and_pexp_on_a_satisfiable_system() {
    let dir = tempfile::tempdir().unwrap();
    let sys = path(dir.path(), "op.json");
    fs::write(&sys, r#"{"n":2,"ineqs":["x1 - x2"],"eqs":["x1 + x2 - 1"]}"#).unwrap();
    // the only solution is x = (1, 0). At degree 2, E(x1) = E(x2) = 1/2 with
    // E(x1x2) = 0 passes every condition, so the bound is 1/2; at degree 4
    // the relaxation over two variables is exact.
    for (d, want) in [("2", 0.5), ("4", 1.0)] {
        let out = sosps(&["bound", &sys, "--objective", "x1", "--d", d, "--cutoff", "degsum"]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let rep = stdout_json(&out);
        assert!((rep["bound"].as_f64().unwrap() - want).abs() < 1e-6, "{rep}");
        let cert: Vec<f64> = rep["certified_bound"].as_str().unwrap().split('/').map(|t| t.parse().unwrap()).collect();
        assert!(cert[0] / cert[1] <= want && cert[0] / cert[1] > want - 1e-6, "{rep}");
    }

    let pe = path(dir.path(), "pexp.json");
    let out = sosps(&["pexp", &sys, "--d", "2", "--cutoff", "degsum"]);
    assert_eq!(code(&out), 0);
    let rep = stdout_json(&out);
    assert_eq!(rep["check"]["ok"], true, "{rep}");
    fs::write(&pe, rep["pexp"].to_string()).unwrap();
    let out = sosps(&["pexp", &sys, "--check", &pe, "--cutoff", "degsum"]);
    assert_eq!(code(&out), 0);
    // the same functional is not a pseudo-expectation for x1 + x2 = 2
    fs::write(&sys, r#"{"n":2,"eqs":["x1 + x2 - 2"]}"#).unwrap();
    assert_eq!(code(&sosps(&["pexp", &sys, "--check", &pe])), 4);
}

#[test]
fn reduce_emits_a_trace_and_a_constructive_proof() {
    let dir = tempfile::tempdir().unwrap();
    let sys = path(dir.path(), "pair.json");
    let pf = path(dir.path(), "pair.proof.json");
    fs::write(&sys, PAIR).unwrap();
    fs::write(&pf, PAIR_PROOF).unwrap();
    let out = sosps(&["reduce", &sys, &pf]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rep = stdout_json(&out);
    assert_eq!(rep["mode"], "bound_only");
    assert_eq!(rep["trace"]["d0"], 2);
    assert!(rep["proof"].is_null());
    assert!(rep["degree"].as_u64() <= rep["tradeoff_bound"].as_u64());

    let built = path(dir.path(), "built.json");
    let out = sosps(&["reduce", &sys, &pf, "--mode", "constructive", "--proof-out", &built]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout_json(&out)["proof"].is_object());
    assert_eq!(code(&sosps(&["verify", &sys, &built])), 0);
}

#[test]
fn experiment_reports_are_reproducible_and_flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = path(dir.path(), "cfg.json");
    fs::write(&cfg, r#"{"study":{"family":"knapsack","n":[1,2],"k":[1]},"degrees":[2]}"#).unwrap();
    let csv = path(dir.path(), "out/ks.csv");
    let json = path(dir.path(), "out/ks.json");
    let run = || {
        let out = sosps(&["experiment", &cfg, "--degrees", "2,4", "--csv", &csv, "--json", &json, "--jobs", "2"]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        (fs::read(&csv).unwrap(), fs::read(&json).unwrap())
    };
    let first = run();
    assert_eq!(run(), first);
    let text = String::from_utf8(first.0).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("ks-01-01,knapsack,1,1,1,false,2,4,"), "{}", lines[1]);
    assert!(lines[2].starts_with("ks-02-01,knapsack,2,1,1,false,4,4,"), "{}", lines[2]);
    assert!(dir.path().join("out/ks.timings.csv").exists());
}

#[test]
fn empty_study_gives_a_header_only_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = path(dir.path(), "cfg.json");
    fs::write(&cfg, r#"{"study":{"family":"maxcsp","n":4,"m":3},"seeds":[]}"#).unwrap();
    let out = sosps(&["experiment", &cfg]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1);
}

#[test]
fn jobs_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = path(dir.path(), "cfg.json");
    fs::write(&cfg, r#"{"study":{"family":"knapsack","n":[1],"k":[1]}}"#).unwrap();
    let bad = Command::new(env!("CARGO_BIN_EXE_sosps"))
        .args(["experiment", &cfg])
        .env("SOSPS_JOBS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
    let ok =
        Command::new(env!("CARGO_BIN_EXE_sosps")).args(["experiment", &cfg]).env("SOSPS_JOBS", "1").output().unwrap();
    assert_eq!(code(&ok), 0);
}
