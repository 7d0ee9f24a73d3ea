use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fogaudit::{KeyPair, SecretKey};

fn fogaudit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fogaudit"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn keygen_writes_consistent_key_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = fogaudit(dir.path(), &["keygen", "--count", "3", "--out", "k"]);
    assert!(o.status.success());
    let mut addresses = BTreeSet::new();
    for i in 0..3 {
        let text = fs::read_to_string(dir.path().join(format!("k/key-{i}.json"))).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let keys = KeyPair::from_secret(SecretKey::from_hex(v["secret"].as_str().unwrap()).unwrap());
        assert_eq!(v["address"].as_str().unwrap(), keys.address().to_string());
        assert_eq!(v["public"].as_str().unwrap(), keys.public().to_hex());
        addresses.insert(keys.address());
    }
    assert_eq!(addresses.len(), 3);

    let o = fogaudit(dir.path(), &["keygen", "--count", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn demo_auth_paths() {
    let dir = tempfile::tempdir().unwrap();
    let o = fogaudit(dir.path(), &["demo-auth"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("step ")).count(), 7);
    assert!(out.trim_end().lines().last().unwrap().starts_with("session established"));

    assert!(fogaudit(dir.path(), &["keygen", "--count", "2", "--seed", "4"]).status.success());
    let o = fogaudit(
        dir.path(),
        &["demo-auth", "--iot-key", "keys/key-0.json", "--fog-key", "keys/key-1.json", "--json"],
    );
    assert!(o.status.success());
    assert!(stdout(&o).contains("\"frames\""));

    let code = |args: &[&str]| fogaudit(dir.path(), args).status.code();
    assert_eq!(code(&["demo-auth", "--fog-reputation", "2", "--threshold", "5"]), Some(12));
    assert_eq!(code(&["demo-auth", "--unregistered", "iot"]), Some(10));
    assert_eq!(code(&["demo-auth", "--unregistered", "fog"]), Some(11));
    assert_eq!(code(&["demo-auth", "--iot-key", "missing.json"]), Some(3));
    assert_eq!(code(&["demo-auth", "--fog-reputation", "99"]), Some(4));
}

#[test]
fn simulate_cost_outputs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("small.toml"), "num_fogs = 12\ntrials = 20\n").unwrap();
    let o = fogaudit(
        dir.path(),
        &["simulate", "cost", "--config", "small.toml", "--cluster", "3", "--cluster", "6", "--seed", "7"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let per_trial = fs::read_to_string(dir.path().join("results/cost.csv")).unwrap();
    assert_eq!(per_trial.lines().count(), 1 + 3 * 2 * 20);
    let summary = fs::read_to_string(dir.path().join("results/cost_summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows[0], "policy,cluster,trials,mean,variance,std_error");
    assert_eq!(rows.len(), 7);
    assert!(rows[1].starts_with("random,3,20,"));
    assert!(dir.path().join("results/cost.gp").exists());
}

#[test]
fn simulate_state_live_count_nonincreasing() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("small.toml"), "num_fogs = 10\ntrials = 10\nhorizon = 200\n").unwrap();
    let o = fogaudit(dir.path(), &["simulate", "state", "--config", "small.toml", "--policy", "weighted"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let series = fs::read_to_string(dir.path().join("results/state_series.csv")).unwrap();
    let live: Vec<f64> = series
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(live.len(), 201);
    assert!(live.windows(2).all(|w| w[1] <= w[0]));
    let trials = fs::read_to_string(dir.path().join("results/state_trials.csv")).unwrap();
    assert!(trials.lines().skip(1).all(|l| l.contains(",true,")));
}

#[test]
fn simulate_rejects_bad_configs() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| fogaudit(dir.path(), args).status.code();
    assert_eq!(code(&["simulate", "cost", "--cluster", "0"]), Some(4));
    assert_eq!(code(&["simulate", "cost", "--trials", "0"]), Some(4));
    fs::write(dir.path().join("bad.toml"), "bogus = 1\n").unwrap();
    assert_eq!(code(&["simulate", "cost", "--config", "bad.toml"]), Some(4));
    assert_eq!(code(&["simulate", "cost", "--config", "absent.toml"]), Some(3));
    assert_eq!(code(&["simulate", "cost", "--policy", "roundrobin"]), Some(2));
}
