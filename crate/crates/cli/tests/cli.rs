use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn onticlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_onticlab"))
        .args(args)
        .current_dir(workspace())
        .env_remove("ONTICLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn workspace() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut full = vec!["--emit", "json"];
    full.extend_from_slice(args);
    let out = onticlab(&full);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)));
    (v, out.status.code().unwrap())
}

#[test]
fn mzi_figure_one_phase_pi() {
    let (v, code) = json(&["mzi", "--figure", "1", "--phase", "pi"]);
    assert_eq!(code, 0);
    let p = &v["results"]["probabilities"]["phi=pi"];
    assert!((p["B2"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(p["B1"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["inputs_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn mzi_figure_four_dark_detector() {
    let (v, _) = json(&["mzi", "--figure", "4"]);
    for phase in ["phi=0", "phi=pi"] {
        assert!(v["results"]["probabilities"][phase]["B0"].as_f64().unwrap().abs() < 1e-12);
    }
}

#[test]
fn figure_three_at_half_reduces_to_figure_one() {
    let (three, _) = json(&["mzi", "--figure", "3", "--alpha2", "0.5"]);
    let (one, _) = json(&["mzi", "--figure", "1"]);
    for phase in ["phi=0", "phi=pi"] {
        for o in ["B1", "B2"] {
            let a = three["results"]["probabilities"][phase][o].as_f64().unwrap();
            let b = one["results"]["probabilities"][phase][o].as_f64().unwrap();
            assert!((a - b).abs() < 1e-12, "{phase} {o}");
        }
        assert!(three["results"]["probabilities"][phase]["B0"].as_f64().unwrap().abs() < 1e-12);
    }
}

#[test]
fn invalid_configs_exit_two() {
    assert_eq!(onticlab(&["mzi", "--figure", "1", "--alpha2", "0.3"]).status.code(), Some(2));
    assert_eq!(onticlab(&["mzi", "--figure", "7"]).status.code(), Some(2));
    assert_eq!(onticlab(&["mzi", "--figure", "1", "--phase", "half"]).status.code(), Some(2));
    assert_eq!(onticlab(&["construct", "--alpha2", "1.5", "--N", "2"]).status.code(), Some(2));
    assert_eq!(onticlab(&["prove", "--builder", "nope"]).status.code(), Some(2));
    assert_eq!(onticlab(&["mzi", "--figure", "1", "--emit", "csv"]).status.code(), Some(2));
}

#[test]
fn construct_feasible_and_infeasible() {
    let (v, code) = json(&["construct", "--alpha2", "0.5", "--N", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["M"], 2);
    assert!(v["results"]["bundle"]["U"].is_array());
    let out = onticlab(&["construct", "--alpha2", "0.7", "--N", "3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("smallest feasible N is 4"));
    let (v, code) = json(&["construct", "--alpha2", "0.5", "--N", "2", "--restricted"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["restricted"]["ok"], true);
}

#[test]
fn scan_csv_matches_bound() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_onticlab"))
        .args(["scan", "--n-min", "2", "--n-max", "6", "--out", path.to_str().unwrap()])
        .env("ONTICLAB_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# onticlab scan schema_version="));
    assert_eq!(lines.next().unwrap(), "N,alpha2,M,feasible,bound");
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let (n, a2): (f64, f64) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        let bound = (n - 1.0) / n;
        assert_eq!(f[3] == "true", a2 <= bound + 1e-12, "{line}");
    }
    let bad = Command::new(env!("CARGO_BIN_EXE_onticlab"))
        .args(["scan", "--n-max", "3"])
        .env("ONTICLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn prove_trace_and_search_agree() {
    let (v, code) = json(&["prove", "--builder", "mzi-fig1", "--search", "6"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["trace_check"], "ok");
    assert_eq!(v["results"]["search"]["verdict"], "unsat");
    assert_eq!(v["results"]["trace"]["conclusion"], "Λ[phi] ∩ Λ[psi] = ∅");
}

#[test]
fn prove_without_indifference_saves_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let witness = dir.path().join("w.json");
    let (v, code) = json(&[
        "prove",
        "--builder",
        "mzi-fig1",
        "--axioms",
        "completeness,coverage",
        "--search",
        "6",
        "--witness-out",
        witness.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["search"]["verdict"], "sat");
    let (m, code) = json(&["check-model", witness.to_str().unwrap(), "--builder", "mzi-fig1"]);
    assert_eq!(code, 0);
    assert_eq!(m["results"]["classification"]["kind"], "PsiEpistemic");
    assert!(m["results"]["completeness_violations"].as_array().unwrap().is_empty());
}

#[test]
fn prove_restricted_variant_and_scenario_file() {
    let (v, code) = json(&["prove", "--builder", "restricted", "--variant", "restricted"]);
    assert_eq!(code, 0);
    let rules: Vec<&str> = v["results"]["trace"]["steps"].as_array().unwrap().iter().map(|s| s["rule"].as_str().unwrap()).collect();
    assert!(rules.contains(&"Evolution"));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(&path, r#"{"builder": "mzi-fig2"}"#).unwrap();
    let (v, code) = json(&["prove", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["inputs"]["source"]["scenario_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn check_model_toy_bit() {
    let (v, code) = json(&["check-model", "models/toybit.json"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["classification"]["overlap"][0], "λ2");
    let swap = v["results"]["indifference"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["member"] == "swap")
        .unwrap()
        .clone();
    assert_eq!(swap["pointwise"]["verdict"], "Violation");
    assert_eq!(swap["set_preserving"]["verdict"], "Ok");
}

#[test]
fn reports_identical_modulo_timings() {
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("timings");
        serde_json::to_string(&v).unwrap()
    };
    for args in [&["construct", "--alpha2", "0.5", "--N", "3"][..], &["prove", "--builder", "construction", "--search", "3"]] {
        let (a, _) = json(args);
        let (b, _) = json(args);
        assert_eq!(strip(a), strip(b));
    }
}

#[test]
fn tolerance_file() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    std::fs::write(&good, "zero = 1e-10\nunitary = 1e-11\n").unwrap();
    let (v, code) = json(&["--config", good.to_str().unwrap(), "mzi", "--figure", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["tolerances"]["zero"], 1e-10);
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "zer0 = 1\n").unwrap();
    assert_eq!(onticlab(&["--config", bad.to_str().unwrap(), "mzi", "--figure", "2"]).status.code(), Some(2));
    assert_eq!(onticlab(&["--config", "missing.toml", "mzi", "--figure", "2"]).status.code(), Some(2));
}
