use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ldis_core::laplace_lab::{log_binomial_tail, rate_slope_fit};
use ldis_core::rate_functions::gamma_plus;
use serde_json::{json, Value};
use tempfile::TempDir;

fn ldis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ldis")).args(args).output().expect("run ldis")
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

/// Run a config command and return the parsed report.
fn report(command: &[&str], cfg: &Value) -> Value {
    let dir = TempDir::new().unwrap();
    let path = write_config(dir.path(), "config.json", cfg);
    let out = dir.path().join("report.json");
    let mut args = command.to_vec();
    args.extend(["--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let run = ldis(&args);
    assert!(run.status.success(), "stderr: {}", String::from_utf8_lossy(&run.stderr));
    serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap()
}

fn exit_code(command: &[&str], cfg: &Value) -> (i32, String) {
    let dir = TempDir::new().unwrap();
    let path = write_config(dir.path(), "config.json", cfg);
    let mut args = command.to_vec();
    args.extend(["--config", path.to_str().unwrap()]);
    let run = ldis(&args);
    (run.status.code().unwrap(), String::from_utf8_lossy(&run.stderr).into_owned())
}

fn num(v: &Value) -> f64 {
    match v {
        Value::Number(n) => n.as_f64().unwrap(),
        Value::String(s) if s == "inf" => f64::INFINITY,
        other => panic!("not a number: {other}"),
    }
}

fn gaussian_mc() -> Value {
    json!({"family": "standard-mc", "target": {"law": "gaussian", "mean": 0, "sd": 1}})
}

#[test]
fn zero_variance_sweep_follows_gamma() {
    let cfg = json!({
        "model": {"family": "zero-variance", "target": {"law": "gaussian", "mean": 0, "sd": 1},
                  "importance": {"kind": "interval", "lo": 3, "hi": "inf"}},
        "analysis": {"kind": "subset", "eps": 0.2, "delta_prime": [0.25, 0.5, 0.75]}
    });
    let r = report(&["analyze", "subset"], &cfg);
    let rates: Vec<f64> = r["results"]["reports"].as_array().unwrap().iter().map(|x| num(&x["plus"]["rate"]["value"])).collect();
    assert_eq!(rates.len(), 3);
    assert!(rates.windows(2).all(|w| w[0] < w[1]));
    for (rate, dp) in rates.iter().zip([0.25, 0.5, 0.75]) {
        assert!((rate - gamma_plus(0.2, dp).unwrap().value).abs() < 1e-12);
    }
}

#[test]
fn standard_mc_subset_rate() {
    let cfg = json!({"model": gaussian_mc(), "analysis": {"kind": "subset", "eps": 0.1, "delta": 0.3}});
    let r = report(&["analyze", "subset"], &cfg);
    let rate = num(&r["results"]["reports"][0]["plus"]["rate"]["value"]);
    assert!((rate - 2.104602e-3).abs() < 1e-9, "{rate}");
    assert_eq!(r["command"], "analyze subset");
    assert_eq!(r["tool"], "ldis");
}

#[test]
fn delta_above_target_mass_is_a_validation_error() {
    let model = json!({"family": "gaussian-tilt", "mean": 0, "sd": 1, "theta": 2,
                       "importance": {"kind": "interval", "lo": 2, "hi": "inf"}});
    let cfg = json!({"model": model, "analysis": {"kind": "subset", "eps": 0.1, "delta": 0.5}});
    let (code, err) = exit_code(&["analyze", "subset"], &cfg);
    assert_eq!(code, 2);
    assert!(err.contains("analysis.delta[0]"), "{err}");
}

#[test]
fn quantile_from_tail_mass() {
    let cfg = json!({"model": gaussian_mc(), "analysis": {"kind": "quantile", "alpha": 0.05, "tail": 0.03}});
    let r = report(&["analyze", "quantile"], &cfg);
    let q = &r["results"]["results"][0];
    assert!((num(&q["lambda_star"]) - 0.5316597106688328).abs() < 1e-9);
    assert!((num(&q["rate"]["value"]) - 0.0057488986305996165).abs() < 1e-12);
}

#[test]
fn quantile_inside_typical_set() {
    let model = json!({"family": "standard-mc", "target": {"law": "finite", "points": [1, 2], "probs": [0.5, 0.5]}});
    let cfg = json!({"model": model, "analysis": {"kind": "quantile", "alpha": 0.5, "eps": 0.5}});
    let r = report(&["analyze", "quantile"], &cfg);
    let q = &r["results"]["results"][0];
    assert_eq!(num(&q["rate"]["value"]), 0.0);
    assert!(q["diagnostics"].to_string().contains("inside typical set"));
}

#[test]
fn divergent_moment_is_numerical_failure() {
    let model = json!({"family": "exponential-pair", "target_rate": 1, "proposal_rate": 2});
    let cfg = json!({"model": model, "analysis": {"kind": "quantile", "alpha": 0.1, "eps": 0.2}});
    let (code, err) = exit_code(&["analyze", "quantile"], &cfg);
    assert_eq!(code, 3);
    assert!(err.contains("diverges"), "{err}");
}

#[test]
fn laplace_linear_and_constant() {
    let base = |functional: Value| {
        json!({"analysis": {"kind": "laplace", "functional": functional, "n": [1, 10, 40],
               "proposal": {"points": [0, 1], "probs": [0.5, 0.5]}, "wf": [1, 1]}})
    };
    let r = report(&["verify", "laplace"], &base(json!({"kind": "linear", "g": [0, 1]})));
    for g in r["results"]["gaps"].as_array().unwrap() {
        assert!(num(g) <= 1e-10);
    }
    let r = report(&["verify", "laplace"], &base(json!({"kind": "constant", "value": 0.7})));
    for g in r["results"]["gaps"].as_array().unwrap() {
        assert_eq!(num(g), 0.0);
    }
}

#[test]
fn laplace_series_csv() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "model": {"family": "finite", "points": [0, 1, 2], "target": [0.3, 0.3, 0.4], "proposal": [0.5, 0.3, 0.2]},
        "analysis": {"kind": "laplace", "functional": {"kind": "clipped-square", "indices": [2], "cap": 10}, "n": [10, 20, 40, 80]},
        "output": {"series": dir.path().join("gaps.csv")}
    });
    let r = report(&["verify", "laplace"], &cfg);
    assert_eq!(r["results"]["nonincreasing"], true);
    let csv = fs::read_to_string(dir.path().join("gaps.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,w_n,variational_limit,gap");
    assert_eq!(lines.len(), 5);
    assert!(lines[4].starts_with("80,"));
}

#[test]
fn laplace_budget_exit_code() {
    let cfg = json!({"analysis": {"kind": "laplace", "functional": {"kind": "constant", "value": 0}, "n": [500], "method": "enumeration",
                     "proposal": {"points": [0, 1, 2, 3, 4, 5], "probs": [0.1, 0.1, 0.2, 0.2, 0.2, 0.2]}, "wf": [1, 1, 1, 1, 1, 1]}});
    assert_eq!(exit_code(&["verify", "laplace"], &cfg).0, 4);
}

fn coin_simulation(seed: u64, threads: usize) -> Value {
    json!({
        "model": {"family": "finite", "points": [0, 1], "target": [0.97, 0.03], "proposal": [0.97, 0.03]},
        "analysis": {"kind": "simulate", "event": {"kind": "finite-overweight", "set": [1], "eps": 2.0 / 3.0},
                     "n": [100, 200, 300, 400], "reps": 200000},
        "seed": seed,
        "threads": threads
    })
}

#[test]
fn simulated_slope_matches_binomial_oracle() {
    let r = report(&["simulate"], &coin_simulation(11, 4));
    let ns = [100usize, 200, 300, 400];
    let exact: Vec<f64> = ns.iter().map(|&n| log_binomial_tail(n as u64, 0.03, n as u64 / 20).unwrap().exp()).collect();
    let oracle = rate_slope_fit(&ns, &exact).unwrap().slope;
    let slope = num(&r["results"]["slope"]["slope"]);
    assert!(((slope - oracle) / oracle).abs() < 0.1, "{slope} vs {oracle}");
    for (e, p) in r["results"]["series"].as_array().unwrap().iter().zip(&exact) {
        assert!((num(&e["p_hat"]) - p).abs() < 4.0 * num(&e["std_err"]));
    }
}

#[test]
fn simulate_needs_reps_and_seed() {
    let mut cfg = coin_simulation(1, 1);
    cfg["analysis"]["reps"] = json!(0);
    assert_eq!(exit_code(&["simulate"], &cfg).0, 2);
    let mut cfg = coin_simulation(1, 1);
    cfg.as_object_mut().unwrap().remove("seed");
    let (code, err) = exit_code(&["simulate"], &cfg);
    assert_eq!(code, 2);
    assert!(err.contains("seed"), "{err}");
}

#[test]
fn simulation_is_reproducible_across_threads() {
    let payload = |threads| {
        let mut r = report(&["simulate"], &coin_simulation(5, threads));
        serde_json::to_string(&r["results"].take()).unwrap()
    };
    let one = payload(1);
    assert_eq!(one, payload(4));
    assert_eq!(one, payload(1));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = TempDir::new().unwrap();
    let path = write_config(dir.path(), "c.json", &coin_simulation(1, 2));
    let out = dir.path().join("r.json");
    let run = ldis(&["simulate", "--config", path.to_str().unwrap(), "--seed", "99", "--out", out.to_str().unwrap()]);
    assert!(run.status.success());
    let r: Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(r["config"]["seed"], 99);
}

#[test]
fn command_and_kind_must_agree() {
    let cfg = json!({"model": gaussian_mc(), "analysis": {"kind": "subset", "eps": 0.1, "delta": 0.3}});
    let (code, err) = exit_code(&["analyze", "quantile"], &cfg);
    assert_eq!(code, 2);
    assert!(err.contains("analysis.kind"));
}

#[test]
fn unknown_fields_are_rejected() {
    let cfg = json!({"model": gaussian_mc(), "analysis": {"kind": "subset", "eps": 0.1, "delta": 0.3, "detla": 1}});
    let (code, err) = exit_code(&["analyze", "subset"], &cfg);
    assert_eq!(code, 2);
    assert!(err.contains("detla"), "{err}");
}

#[test]
fn report_reruns_from_its_own_config() {
    let cfg = json!({"model": gaussian_mc(), "analysis": {"kind": "quantile", "alpha": [0.05, 0.1], "eps": 0.2, "side": "both"}});
    let first = report(&["analyze", "quantile"], &cfg);
    let mut echoed = first["config"].clone();
    echoed.as_object_mut().unwrap().remove("output");
    let mut second = report(&["analyze", "quantile"], &echoed);
    assert_eq!(first["results"], second["results"]);
    second["config"].as_object_mut().unwrap().remove("output");
    assert_eq!(echoed, second["config"]);
}

#[test]
fn gamma_grid_csv() {
    let run = ldis(&["gamma", "--eps", "0.1", "--side", "plus", "--s-grid", "0:1:0.25"]);
    assert!(run.status.success());
    let text = String::from_utf8(run.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "s,gamma,feasible");
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[1], "0.0000000000000000e0,0.0000000000000000e0,true");
    assert!(lines[5].ends_with("inf,false"));
    let bad = ldis(&["gamma", "--eps", "0.1", "--side", "minus", "--s-grid", "1:0:0.1"]);
    assert_eq!(bad.status.code(), Some(2));
    let bad_eps = ldis(&["gamma", "--eps", "-1", "--side", "plus", "--s-grid", "0:1:0.5"]);
    assert_eq!(bad_eps.status.code(), Some(2));
}

#[test]
fn random_walk_report() {
    let cfg = json!({"analysis": {"kind": "random-walk", "law": {"family": "gaussian", "mean": 0, "sd": 1},
                                  "a": [2.0], "m": [1, 5, 10], "eps": 0.1, "delta_prime": 0.5}});
    let r = report(&["analyze", "random-walk"], &cfg);
    for rep in r["results"]["reports"].as_array().unwrap() {
        assert_eq!(rep["bound_holds"], true);
    }
}
