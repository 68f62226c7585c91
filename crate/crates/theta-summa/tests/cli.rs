use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use theta_summa::format::{parse_vector, OmegaDoc};
use theta_summa::report::without_wall_time;
use theta_summa_core::riemann::{theta_g, Characteristic, PeriodMatrix};
use theta_summa_core::Complex64;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_theta-summa"));
    c.env_remove("THETA_SUMMA_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("theta-summa-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn value(v: &Value) -> Complex64 {
    Complex64::new(v["value"][0].as_f64().unwrap(), v["value"][1].as_f64().unwrap())
}

#[test]
fn eval_trivial_zeros() {
    let o = run(&["eval", "theta_short", "--a", "1", "--p", "0.2", "--json"]);
    assert!(o.status.success());
    assert_eq!(value(&json(&o)), Complex64::new(0.0, 0.0));
    let o = run(&["eval", "theta1", "--u", "0", "--json"]);
    assert!(value(&json(&o)).norm() < 1e-15);
}

#[test]
fn eval_theta_g_matches_library() {
    let model = scratch("g2.json");
    let o = run(&["model", "hyperelliptic2", "--e", "-5,-3,-1,1,3,5", "--out", model.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["eval", "theta_g", "--omega-file", model.to_str().unwrap(), "--u", "0.1,0.2", "--json"]);
    assert!(o.status.success());
    let doc: OmegaDoc = serde_json::from_str(&std::fs::read_to_string(&model).unwrap()).unwrap();
    let om = theta_summa::format::period_matrix_from_pairs(&doc.omega).unwrap();
    let lib = theta_g(&parse_vector("0.1,0.2").unwrap(), &om, &Characteristic::zero(2), 1e-16).unwrap();
    let out = json(&o);
    assert_eq!(value(&out), lib);
    assert!(out["terms"].as_u64().unwrap() > 0);
}

#[test]
fn eval_theta_g_genus_one_characteristic() {
    let o =
        run(&["eval", "theta_g", "--tau", "0.1+0.9i", "--u", "0.3-0.1i", "--alpha", "1/2", "--beta", "1/2", "--json"]);
    let om = PeriodMatrix::scalar(Complex64::new(0.1, 0.9)).unwrap();
    let lib = theta_g(&[Complex64::new(0.3, -0.1)], &om, &Characteristic::half(1, 1, 1), 1e-16).unwrap();
    assert_eq!(value(&json(&o)), lib);
}

#[test]
fn model_torus_and_byte_stability() {
    let o = run(&["model", "torus", "--tau", "0+1i"]);
    let v = json(&o);
    assert_eq!(v["Omega"], serde_json::json!([[0.0, 1.0]]));
    assert_eq!(v["schema"], "1");
    let a = run(&["model", "hyperelliptic2", "--e", "-5,-3,-1,1,3,5"]);
    let b = run(&["model", "hyperelliptic2", "--e", "-5,-3,-1,1,3,5"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = &json(&a)["certificates"];
    assert!(c["symmetry_defect"].as_f64().unwrap() < 1e-8 && c["im_lambda_min"].as_f64().unwrap() > 0.0);
}

#[test]
fn bad_models_fail_with_diagnostics() {
    let o = run(&["model", "hyperelliptic2", "--e", "-5,-3,-1,1,5,3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
    let o = run(&["model", "hyperelliptic2", "--e", "1,2,3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["model", "torus", "--tau", "0.5-1i"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_examples_pass() {
    let o = run(&["verify", "telescope", "--trials", "100", "--json"]);
    assert!(o.status.success());
    let r = json(&o);
    assert!(r["passed"].as_bool().unwrap() && r["max_residual"].as_f64().unwrap() < 1e-13);
    assert_eq!(r["trials"], 100);

    let o = run(&["verify", "ft", "--trials", "100", "--n-max", "8", "--json"]);
    let r = json(&o);
    assert!(o.status.success() && r["tol"].as_f64() == Some(1e-10));

    let o = run(&["verify", "theorem", "--genus", "2", "--trials", "25", "--n-max", "4", "--json"]);
    let r = json(&o);
    assert!(o.status.success() && r["tol"].as_f64() == Some(1e-5) && r["genus"] == 2);
}

#[test]
fn verify_is_deterministic_apart_from_wall_time() {
    let args = ["verify", "e87", "--trials", "30", "--seed", "99", "--json"];
    let a = without_wall_time(json(&run(&args)));
    let b = without_wall_time(json(&run(&args)));
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = without_wall_time(json(&run(&["verify", "e87", "--trials", "30", "--seed", "100", "--json"])));
    assert_ne!(a, c);
}

#[test]
fn seed_comes_from_the_environment() {
    let with_env =
        bin().args(["verify", "fay", "--trials", "5", "--json"]).env("THETA_SUMMA_SEED", "7").output().unwrap();
    let with_flag = run(&["verify", "fay", "--trials", "5", "--seed", "7", "--json"]);
    assert_eq!(json(&with_env)["seed"], 7);
    assert_eq!(without_wall_time(json(&with_env)), without_wall_time(json(&with_flag)));
}

#[test]
fn failing_verification_exits_one_and_lists_failures() {
    let o = run(&["verify", "ft", "--trials", "10", "--tol", "1e-30", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let r = json(&o);
    let failures = r["failures"].as_array().unwrap();
    assert!(!failures.is_empty() && !r["passed"].as_bool().unwrap());
    let seeds: Vec<u64> = failures.iter().map(|f| f["seed"].as_u64().unwrap()).collect();
    assert!(seeds.windows(2).all(|w| w[0] <= w[1]));
    assert!(failures[0]["inputs"]["t"].is_array());
}

#[test]
fn usage_and_io_errors_exit_two() {
    assert_eq!(run(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "fay", "--genus", "3"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "theta_short", "--a", "x", "--p", "0.1"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "theta_g", "--omega-file", "/nonexistent/m.json", "--u", "0"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "fay", "--model", "/nonexistent/m.json"]).status.code(), Some(2));
    assert_eq!(run(&["summand", "eval", "--config", "/nonexistent/s.json"]).status.code(), Some(2));
}

#[test]
fn report_file_and_all() {
    let out = scratch("all.json");
    let o = run(&["verify", "all", "--trials", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 15);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["reports"].as_array().unwrap().len(), 15);
    assert!(v["passed"].as_bool().unwrap());
}

#[test]
fn summand_round_trip_with_model_reference() {
    let model = scratch("torus.json");
    let cfg = scratch("summand.json");
    assert!(run(&["model", "torus", "--tau", "0.2+1.1i", "--out", model.to_str().unwrap()]).status.success());
    let o = run(&[
        "summand",
        "sample",
        "--model",
        model.to_str().unwrap(),
        "--n",
        "4",
        "--seed",
        "3",
        "--out",
        cfg.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let o = run(&["summand", "eval", "--config", cfg.to_str().unwrap(), "--tol", "1e-9", "--json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    assert_eq!(r["n"], 4);
    assert!(r["residual"].as_f64().unwrap() < 1e-9);

    let mut m: Value = serde_json::from_str(&std::fs::read_to_string(&model).unwrap()).unwrap();
    m["Omega"][0][1] = Value::from(1.2);
    std::fs::write(&model, serde_json::to_string(&m).unwrap()).unwrap();
    let o = run(&["summand", "eval", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_against_a_model_file() {
    let model = scratch("fixed-torus.json");
    assert!(run(&["model", "torus", "--tau", "-0.3+0.8i", "--out", model.to_str().unwrap()]).status.success());
    let o = run(&["verify", "cor2", "--model", model.to_str().unwrap(), "--trials", "10", "--json"]);
    assert!(o.status.success());
    let r = json(&o);
    assert_eq!(r["genus"], 1);
}
