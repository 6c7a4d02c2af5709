use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn aqsv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aqsv")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("bad json ({e}): {}", String::from_utf8_lossy(&o.stdout));
    })
}

#[test]
fn complexity_reference_value() {
    let o = aqsv(&["qsv", "complexity", "--n", "3", "--q0", "0.33", "--epsilon", "0.1", "--delta", "0.01"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["copies"], 283);
    assert_eq!(v["dicke_term"], 231);
    assert_eq!(v["ghz_term"], 283);
    assert!(v["exact_copies"].as_u64().unwrap() <= 283);
}

#[test]
fn spectrum_numeric_check_passes() {
    let o = aqsv(&["qsv", "spectrum", "--n", "3", "--q0", "0.33", "--p", "0", "--check-numeric"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert!(v["residuals"]["max"].as_f64().unwrap() < 1e-10);
    assert_eq!(v["branch"], "a");
    assert_eq!(v["orderings_hold"], true);
    assert!((v["beta"].as_f64().unwrap() - 0.8312342569).abs() < 1e-9);
}

#[test]
fn impossible_tolerance_is_a_numeric_failure() {
    let o = aqsv(&["qsv", "spectrum", "--n", "3", "--q0", "0.33", "--check-numeric", "--tolerance", "1e-30"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_accepts_ideal_and_rejects_noisy() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.jsonl");
    let o = aqsv(&[
        "qsv", "verify", "--n", "3", "--q0", "0.33", "--noise", "none", "--seed", "5",
        "--transcript", path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["accepted"], true);
    assert_eq!(v["copies_checked"], 283);
    let lines: Vec<Value> = fs::read_to_string(&path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 283);
    assert!(lines.iter().enumerate().all(|(i, l)| l["copy"] == i && l["verdict"] == "accept"));
    assert!(lines.iter().all(|l| l["subset"].as_array().unwrap().len() == 3));

    let o = aqsv(&["qsv", "verify", "--n", "3", "--q0", "0.33", "--noise", "coherent_mix:0.5", "--seed", "5"]);
    assert_eq!(code(&o), 3);
    assert_eq!(json(&o)["accepted"], false);
}

#[test]
fn sampling_needs_a_seed() {
    assert_eq!(code(&aqsv(&["qsv", "verify", "--n", "3", "--q0", "0.33"])), 1);
    assert_eq!(code(&aqsv(&["sense", "--n", "3", "--q0", "0.33", "--example", "A", "--shots", "10"])), 1);
    assert_eq!(code(&aqsv(&["robust", "--n", "3", "--q0", "0.33", "--example", "A", "--rounds", "1"])), 1);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&aqsv(&["sense", "--n", "3", "--bogus"])), 1);
    assert_eq!(code(&aqsv(&["frobnicate"])), 1);
    // n below three and a q0 outside (0,1) are rejected before any work
    assert_eq!(code(&aqsv(&["qsv", "complexity", "--n", "2", "--q0", "0.3", "--epsilon", "0.1", "--delta", "0.1"])), 1);
    assert_eq!(code(&aqsv(&["sense", "--n", "3", "--q0", "1.5", "--example", "A"])), 1);
    assert_eq!(code(&aqsv(&["sense", "--n", "3", "--q0", "0.3", "--omega-a", "1.2", "--omega-b", "0.1"])), 1);
    assert_eq!(code(&aqsv(&["qsv", "verify", "--n", "3", "--q0", "0.3", "--noise", "warp:1", "--seed", "1"])), 1);
    assert_eq!(code(&aqsv(&["--help"])), 0);
}

#[test]
fn sense_analytic_only_and_deterministic() {
    let o = aqsv(&["sense", "--n", "3", "--q0", "0.33", "--omega-a", "0.1", "--omega-b", "0.7"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!(v["counts"].is_null() && v["estimate"].is_null());
    let p: Vec<f64> = v["analytic"]["p"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!((v["bounds"]["g_plus"].as_f64().unwrap() - 1.0 / 0.33).abs() < 1e-12);

    let args = ["sense", "--n", "3", "--q0", "0.33", "--example", "C", "--shots", "50000", "--seed", "9", "--audit"];
    let a = aqsv(&args);
    let b = aqsv(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["audit"]["passed"], true);
    let est = v["estimate"]["theta_plus"].as_f64().unwrap();
    assert!((est - std::f64::consts::FRAC_PI_2).abs() < 0.05);
}

#[test]
fn ghz_collapse_exits_three() {
    // with a tiny Dicke weight and few shots the third outcome never appears
    let o = aqsv(&["sense", "--n", "3", "--q0", "0.999999", "--example", "A", "--shots", "5", "--seed", "1"]);
    assert_eq!(code(&o), 3);
    assert!(!json(&o)["estimate_error"].is_null());
}

#[test]
fn opt_sweep_rows_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = aqsv(&["opt", "--n-min", "3", "--n-max", "12", "--examples", "A..L", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        assert!(String::from_utf8_lossy(&o.stdout).contains("120 rows"));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,label,theta_plus,theta_minus,q_min,q_beta,q_G,q_H,H_min");
    assert_eq!(lines.count(), 120);
    assert!(text.contains("3,A,0.785398163397,-0.523598775598,0.0909090909091,0.210526315789,0.327061510085,"));

    let o = aqsv(&["opt", "--n-min", "3", "--n-max", "20", "--examples", "A", "--check-monotone"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 19);
}

#[test]
fn robust_identity_noise_and_restart_cap() {
    let o = aqsv(&[
        "robust", "--n", "3", "--q0", "0.33", "--example", "K", "--rounds", "200", "--delta", "0.5", "--seed", "3",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["restarts"], 0);
    assert_eq!(v["rounds_completed"], 200);
    let m = v["copies_per_round"].as_u64().unwrap();
    assert_eq!(v["copies_consumed"].as_u64().unwrap(), 200 * (m + 1));
    let est = v["estimate"]["theta_plus"].as_f64().unwrap();
    // G+ = 1/q0 per round: 200 rounds give a standard deviation of about 0.12
    assert!((est - std::f64::consts::FRAC_PI_2).abs() < 0.5);

    let o = aqsv(&[
        "robust", "--n", "3", "--q0", "0.33", "--example", "A", "--rounds", "5", "--noise", "coherent_mix:0.67",
        "--restart-cap", "200", "--seed", "3",
    ]);
    assert_eq!(code(&o), 4);
    assert_eq!(json(&o)["status"], "restart_cap_exhausted");
    assert!(String::from_utf8_lossy(&o.stderr).contains("restart cap"));
}

#[test]
fn smaller_delta_needs_more_copies() {
    let copies = |delta: &str| {
        let o = aqsv(&["qsv", "complexity", "--n", "3", "--q0", "0.33", "--epsilon", "0.1", "--delta", delta]);
        json(&o)["copies"].as_u64().unwrap()
    };
    assert!(copies("0.5") < copies("0.01"));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# reference run\nn = 3\nq0 = 0.33\nepsilon = 0.1\ndelta = 0.01\n").unwrap();
    let c = cfg.to_str().unwrap();
    let o = aqsv(&["qsv", "complexity", "--config", c]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["copies"], 283);
    let o = aqsv(&["qsv", "complexity", "--config", c, "--delta", "0.5"]);
    assert_eq!(json(&o)["delta"], 0.5);
    assert_eq!(code(&aqsv(&["qsv", "complexity", "--config", "/nonexistent/x.conf"])), 1);
}
