use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dualism")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_line(out: &Output) -> Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(text.lines().count(), 1, "{text}");
    serde_json::from_str(&text).unwrap()
}

#[test]
fn dualize_shows_the_fermionic_sign() {
    let doc = stdout_json(&run(&["dualize", "--alpha", "0.70710678", "--beta", "0.70710678", "--stats", "fermion"]));
    let c2a = doc["a_form"]["c2"]["re"].as_f64().unwrap();
    let c2b = doc["b_form"]["c2"]["re"].as_f64().unwrap();
    assert!((c2a - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    assert!((c2b + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    assert_eq!(doc["a_form"]["label_variable"], "A");
    assert_eq!(doc["b_form"]["label_variable"], "B");
    assert_eq!(doc["exchange_sign"], -1.0);
}

#[test]
fn chsh_on_the_bell_state() {
    let doc = stdout_json(&run(&["chsh", "--state", "bell", "--settings", "canonical"]));
    let s = doc["result"]["bell_expectation"].as_f64().unwrap();
    assert!((s - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
    assert!(doc["result"]["settings"]["b"]["phi"].as_f64().unwrap() - std::f64::consts::FRAC_PI_4 < 1e-15);
}

#[test]
fn chsh_optimal_reports_both_routes() {
    let doc = stdout_json(&run(&["chsh", "--alpha", "0.3", "--beta", "0.9", "--settings", "optimal"]));
    let analytic = doc["max_abs_s_analytic"].as_f64().unwrap();
    let searched = doc["max_abs_s_searched"].as_f64().unwrap();
    assert!((analytic - searched).abs() < 1e-6);
    assert!(analytic > 2.0);
}

#[test]
fn sweep_writes_eleven_monotone_rows() {
    let out = run(&["sweep", "--gammas", "0:1:0.1", "--settings", "optimal"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("gamma,s_spin,s_momentum,settings_mode"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 11);
    let momentum: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(momentum.windows(2).all(|w| w[1] >= w[0]));
    assert!((momentum[0] - 2.0).abs() < 1e-9);
    assert!((momentum[10] - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-9);
    assert!(rows.iter().all(|r| r[3] == "optimal"));
}

#[test]
fn sweep_accepts_times() {
    let out = run(&["sweep", "--times", "0,2", "--tau", "2", "--settings", "canonical", "--format", "json"]);
    let rows = stdout_json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["gamma"], 1.0);
    assert!((rows[1]["gamma"].as_f64().unwrap() - (-1f64).exp()).abs() < 1e-15);
    assert_eq!(rows[1]["settings_mode"], "fixed-canonical");
}

#[test]
fn sample_csv_has_all_outcomes() {
    let out = run(&["sample", "--shots", "1000", "--seed", "5", "--efficiency", "0.8"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "settings_pair,outcome,count,shots,seed");
    // four outcomes plus lost shots per settings pair
    assert_eq!(lines.len(), 1 + 4 * 5);
    let per_pair: u64 = lines[1..6].iter().map(|l| l.split(',').nth(2).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(per_pair, 1000);
}

#[test]
fn sample_json_carries_the_estimate() {
    let doc = stdout_json(&run(&["sample", "--shots", "100000", "--seed", "1", "--format", "json"]));
    let s_hat = doc["estimate"]["s_hat"].as_f64().unwrap();
    let stderr = doc["estimate"]["stderr"].as_f64().unwrap();
    let exact = doc["exact_s"].as_f64().unwrap();
    assert!((s_hat - exact).abs() <= 4.0 * stderr);
    assert_eq!(doc["routed"]["charlie_label"], "V");
    assert_eq!(doc["routed"]["same_party_probability"], 0.0);
}

#[test]
fn errors_are_one_json_line_with_distinct_codes() {
    let cases: [(&[&str], &str, i32); 7] = [
        (&["chsh", "--bogus"], "ConfigError", 2),
        (&["chsh", "--alpha", "0", "--beta", "0"], "ZeroState", 3),
        (&["dualize", "--nip"], "SpeciesSuperpositionForbidden", 7),
        (&["sign-report", "--settings", "80,0,90,90,90,45,90,-45"], "SettingsNotInPlane", 8),
        (&["sample", "--shots", "1"], "InsufficientShots", 9),
        (&["sign-report", "--state", "product"], "DegenerateExpectation", 10),
        (&["sample", "--efficiency", "1.5"], "ConfigError", 2),
    ];
    for (args, kind, code) in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(code), "{args:?}");
        assert!(out.stdout.is_empty());
        let e = error_line(&out);
        assert_eq!(e["error"], kind);
        assert_eq!(e["exit_code"], code);
    }
    let nip = error_line(&run(&["dualize", "--nip"]));
    assert_eq!(nip["details"]["slot_b_index"], 1);
}

#[test]
fn nip_products_have_both_readings() {
    let doc = stdout_json(&run(&["dualize", "--nip", "--alpha", "1", "--beta", "0"]));
    assert_eq!(doc["b_form"]["label_variable"], "B");
}

#[test]
fn config_file_round_trips_and_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out_file = dir.path().join("out.json");
    let out_arg = out_file.to_str().unwrap();
    let args = ["chsh", "--alpha", "0.3", "--alpha-im", "-0.1234567", "--stats", "fermion", "--form", "b", "--output", out_arg];

    let dumped = run(&[&args[..], &["--dump-config"]].concat());
    assert!(dumped.status.success());
    std::fs::write(&cfg, &dumped.stdout).unwrap();
    let redumped = run(&["--config", cfg.to_str().unwrap(), "--dump-config"]);
    assert_eq!(redumped.stdout, dumped.stdout);

    assert!(run(&args).status.success());
    let direct = std::fs::read(&out_file).unwrap();
    std::fs::remove_file(&out_file).unwrap();
    let out = run(&["--config", cfg.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    assert_eq!(std::fs::read(&out_file).unwrap(), direct);
}

#[test]
fn config_and_subcommand_are_exclusive() {
    let out = run(&["--config", "x.json", "chsh"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["--config", "/nonexistent/run.json"]);
    assert_eq!(error_line(&out)["error"], "IoError");
    assert_eq!(out.status.code(), Some(12));
}
