use std::fs;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_poisson-sharp");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("POISSON_SHARP_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn constant_json_is_deterministic_without_timing() {
    let args = [
        "--format",
        "json",
        "--no-timing",
        "constant",
        "--n",
        "3",
        "--alpha",
        "1",
        "--p",
        "2",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(v.get("wall_time_seconds").is_none());
    assert_eq!(v["params"]["n"], 3);
    let value = v["results"][0]["value"].as_f64().unwrap();
    let k2 = (3.0 / (8.0 * std::f64::consts::PI.powi(2))).sqrt();
    assert!(((value - k2) / k2).abs() < 1e-10);
}

#[test]
fn timing_is_reported_by_default() {
    let o = run(&["--format", "json", "kappa", "--n", "2", "--alpha", "1"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn p_infinity_and_direction() {
    let o = run(&["--format", "csv", "constant", "--n", "2", "--alpha", "1", "--p", "inf"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("2,"));
    let o = run(&[
        "constant",
        "--n",
        "2",
        "--alpha",
        "1",
        "--p",
        "2",
        "--direction",
        "1,0,1",
    ]);
    assert!(o.status.success());
    let o = run(&["constant", "--n", "2", "--alpha", "1", "--p", "2", "--direction", "1,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_writes_csv_and_skips_invalid_points() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    let o = run(&[
        "sweep",
        "--n-range",
        "2:3",
        "--alpha-range",
        "-2.5,1",
        "--p-range",
        "1,2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,alpha,p,value,gamma_star,t_star,method,error_estimate"
    );
    assert_eq!(lines.count(), 5);
    assert!(String::from_utf8_lossy(&o.stderr).contains("skipping"));
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.conf");
    fs::write(&path, "# settings\nrel_tol = 1e-9\nseed = 11\n").unwrap();
    let o = run(&[
        "--format",
        "json",
        "--config",
        path.to_str().unwrap(),
        "--seed",
        "12",
        "kappa",
        "--n",
        "2",
        "--alpha",
        "1",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["rel_tol"].as_f64(), Some(1e-9));
    assert_eq!(v["config"]["rng_seed"], 12);

    let o = Command::new(BIN)
        .args(["--format", "json", "kappa", "--n", "2", "--alpha", "1"])
        .env("POISSON_SHARP_CONFIG", &path)
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["rng_seed"], 11);

    fs::write(&path, "unknown = 1\n").unwrap();
    let o = run(&["--config", path.to_str().unwrap(), "kappa", "--n", "2", "--alpha", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    assert_eq!(
        run(&["constant", "--n", "2", "--alpha", "-2", "--p", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["constant", "--n", "0", "--alpha", "1", "--p", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    assert_eq!(
        run(&["--abs-tol", "-1", "kappa", "--n", "2", "--alpha", "1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_alpha1_prints_pass_lines() {
    let o = run(&["verify", "--suite", "alpha1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 14);
    assert!(text.contains("suite alpha1: passed"));
}

#[test]
fn sharpness_bump_and_extremal() {
    let o = run(&["--format", "csv", "sharpness", "--n", "2", "--alpha", "1", "--p", "1"]);
    assert!(o.status.success());
    let ratio: f64 = stdout(&o)
        .lines()
        .nth(1)
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((0.99..=1.0 + 1e-5).contains(&ratio));
    let o = run(&[
        "--format",
        "json",
        "sharpness",
        "--n",
        "2",
        "--alpha",
        "1",
        "--p",
        "2",
        "--random",
        "3",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["results"].as_array().unwrap().len(), 4);
    assert!(v["seed"].is_u64());
}
