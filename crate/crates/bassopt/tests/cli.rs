//! End-to-end runs of the binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn base_config() -> Value {
    json!({
        "model": "complete",
        "nodes": 3,
        "response": {"p0": 0.01, "bp": 0.01, "q0": 0.1, "bq": 0.1},
        "economics": {"gamma": 1000.0, "theta": 0.01, "horizon": 30.0},
        "sim": {"n_runs": 20000, "seed": 1, "dt": 0.5}
    })
}

fn run(dir: &Path, cfg: &Value, args: &[&str]) -> Output {
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    Command::new(env!("CARGO_BIN_EXE_bassopt"))
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/summary.json")).unwrap()).unwrap()
}

#[test]
fn solve_writes_solution_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &base_config(), &["solve"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = summary(dir.path());
    assert_eq!(s["model"], "complete");
    assert!(s["delta_pi"].as_f64().unwrap() > 0.0);
    assert_eq!(s["config"]["solver"]["dt"], 0.05);
    let csv = fs::read_to_string(dir.path().join("out/solution.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("t,sp,sq,sp_plus_sq,f_opt,f0"), "{header}");
    assert_eq!(csv.lines().count(), 1 + 601);
}

#[test]
fn missing_gamma_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = base_config();
    cfg["economics"].as_object_mut().unwrap().remove("gamma");
    let o = run(dir.path(), &cfg, &["solve"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gamma"), "{}", stderr(&o));
}

#[test]
fn unknown_keys_and_bad_values_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &base_config(), &["--set", "economics.gama=3", "solve"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("economics.gama"), "{}", stderr(&o));
    let o = run(dir.path(), &base_config(), &["--set", "response.bp=-1", "solve"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bp"), "{}", stderr(&o));
}

#[test]
fn no_response_gives_no_gain() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &base_config(), &["--set", "response.bp=0", "--set", "response.bq=0", "solve"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(summary(dir.path())["delta_pi"].as_f64(), Some(0.0));
}

#[test]
fn sweep_over_network_size() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &base_config(), &["sweep", "--axis", "M", "--values", "2,3,5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "M,delta_pi,pi_opt,pi0,converged");
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("2,") && rows[3].starts_with("5,"));
    assert!(rows[1..].iter().all(|r| r.ends_with(",true")));
}

#[test]
fn empty_sweep_writes_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    for form in [&["--values="][..], &["--values"][..], &[][..]] {
        let args: Vec<&str> = ["sweep", "--axis", "T"].iter().chain(form).copied().collect();
        let o = run(dir.path(), &base_config(), &args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let csv = fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
        assert_eq!(csv.lines().collect::<Vec<_>>(), ["T,delta_pi,pi_opt,pi0,converged"]);
    }
}

#[test]
fn bad_axis_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &base_config(), &["sweep", "--axis", "zeta", "--values", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(dir.path(), &base_config(), &["sweep", "--axis", "T", "--values", "10,abc"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("abc"));
}

#[test]
fn infinite_horizon_in_a_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &base_config(), &["sweep", "--axis", "T", "--values", "20,inf"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    assert!(csv.lines().nth(2).unwrap().starts_with("inf,"), "{csv}");
}

#[test]
fn solver_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &base_config(), &["--set", "solver.max_iters=1", "solve"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn validate_passes_and_a_corrupted_reference_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &base_config(), &["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/validation.json")).unwrap()).unwrap();
    assert_eq!(rep["pass"], true);
    let csv = fs::read_to_string(dir.path().join("out/validation.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,reference,f_mean,f_stderr,z"));

    let o = run(dir.path(), &base_config(), &["validate", "--corrupt", "0.05"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let read = |name: &str| fs::read(dir.path().join("out").join(name)).unwrap();
    run(dir.path(), &base_config(), &["--jobs", "1", "simulate"]);
    let sim1 = read("simulation.csv");
    run(dir.path(), &base_config(), &["--jobs", "3", "simulate"]);
    assert_eq!(sim1, read("simulation.csv"));
    run(dir.path(), &base_config(), &["solve"]);
    let (a, b) = (read("solution.csv"), read("summary.json"));
    run(dir.path(), &base_config(), &["solve"]);
    assert_eq!(a, read("solution.csv"));
    assert_eq!(b, read("summary.json"));
    // a different seed moves the simulation
    run(dir.path(), &base_config(), &["--seed", "2", "simulate"]);
    assert_ne!(sim1, read("simulation.csv"));
}
