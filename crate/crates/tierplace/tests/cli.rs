use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tierplace::bundle::{Archive, BUNDLE_FILES, RECORD_FILE};
use tierplace::commands;
use tierplace::config::Config;

fn tierplace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tierplace"))
        .args(args)
        .env_remove(commands::OUT_ENV)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn small_run(dir: &Path, extra: &[&str]) -> Output {
    let out = dir.to_str().unwrap();
    let mut args = vec!["run", "--out", out, "--set", "scenario.n_tasks=12", "--set", "scenario.samples_per_stream=5"];
    args.extend_from_slice(extra);
    tierplace(&args)
}

#[test]
fn run_writes_every_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = small_run(dir.path(), &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in BUNDLE_FILES.iter().chain([&RECORD_FILE, &"summary.txt"]) {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("energy saving (%)"));
    assert!(summary.contains("wall time"));
}

#[test]
fn csv_headers_match_golden() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&small_run(dir.path(), &[])), 0);
    let golden = include_str!("golden/csv_headers.txt");
    let mut seen = 0;
    for line in golden.lines() {
        let (file, header) = line.split_once(": ").unwrap();
        let text = fs::read_to_string(dir.path().join(file)).unwrap();
        assert_eq!(text.lines().next().unwrap(), header, "{file}");
        seen += 1;
    }
    let csvs = BUNDLE_FILES.iter().filter(|f| f.ends_with(".csv")).count();
    assert_eq!(seen, csvs, "every CSV of the bundle has a golden header");
}

#[test]
fn rerun_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(code(&small_run(a.path(), &["--trials", "3"])), 0);
    assert_eq!(code(&small_run(b.path(), &["--trials", "3"])), 0);
    for f in BUNDLE_FILES.iter().chain([&RECORD_FILE]) {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn report_regenerates_bundle_bit_identically() {
    let run = tempfile::tempdir().unwrap();
    let again = tempfile::tempdir().unwrap();
    assert_eq!(code(&small_run(run.path(), &["--trials", "4", "--urllc", "on"])), 0);
    let o = tierplace(&["report", "--from", run.path().to_str().unwrap(), "--out", again.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in BUNDLE_FILES {
        assert_eq!(fs::read(run.path().join(f)).unwrap(), fs::read(again.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn archive_round_trips_through_json() {
    let cfg = Config::load(None, &["scenario.n_tasks=6".into(), "scenario.trials=2".into()]).unwrap();
    let a = commands::execute(&cfg).unwrap();
    let back: Archive = serde_json::from_str(&a.to_json().unwrap()).unwrap();
    assert_eq!(back, a);
    assert_eq!(back.records.len(), 2);
    assert_eq!(back.records[1].seed, cfg.scenario.seed + 1);
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = small_run(dir.path(), &["--seed", "9", "--strategy", "cloud-only"]);
    assert_eq!(code(&o), 0);
    let a = Archive::read(dir.path()).unwrap();
    assert_eq!(a.records[0].seed, 9);
    assert_eq!(a.records[0].strategy.name(), "cloud_only");
    assert_eq!(a.records[0].metrics.energy_saving_fraction, 0.0);
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"scenario": {"n_tasks": "many"}}"#).unwrap();
    let o = tierplace(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema"));

    fs::write(&cfg, r#"{"scenario": {"n_taks": 3}}"#).unwrap();
    assert_eq!(code(&tierplace(&["run", "--config", cfg.to_str().unwrap()])), 1);
    assert_eq!(code(&tierplace(&["run", "--config", "/nonexistent/tierplace.json"])), 1);
    assert_eq!(code(&tierplace(&["frobnicate"])), 1);
    assert_eq!(code(&tierplace(&["run", "--set", "scenario.payload_bits=-1"])), 1);
}

#[test]
fn unplaceable_streams_exit_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    // a 1 µs deadline rules out every node
    let o = small_run(dir.path(), &["--set", "scenario.deadline_s=0.000001"]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("task-000"));
    assert!(dir.path().join(RECORD_FILE).is_file());
}

#[test]
fn availability_table_digits() {
    let o = tierplace(&["availability", "--mtbf", "8670", "--mttr", "1", "--layers", "3"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("99.9884673"), "{s}");
    assert!(s.contains("99.9999999998466"), "{s}");
    assert!(s.contains("µs"), "{s}");

    let o = tierplace(&["availability", "--mtbf", "8670", "--mttr", "0"]);
    assert_eq!(stdout(&o).matches("100.0000000000000%").count(), 2);

    let o = tierplace(&["availability", "--mtbf", "100", "--mttr", "2", "--layers", "1"]);
    let row = stdout(&o).lines().find(|l| l.starts_with("Availability")).unwrap().to_string();
    let cols: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(cols[1], cols[2]);

    assert_eq!(code(&tierplace(&["availability", "--mtbf", "0", "--mttr", "1"])), 1);
    assert_eq!(code(&tierplace(&["availability", "--mtbf", "-5", "--mttr", "1"])), 1);
}

#[test]
fn verify_over_provisioned_instance_passes() {
    let o = tierplace(&["verify", "--set", "scenario.n_tasks=5", "--set", "scenario.tiers.edge.count=5", "--set", "scenario.deadline_s=10"]);
    let s = stdout(&o);
    assert_eq!(code(&o), 0, "{s}");
    assert!(!s.contains("FAIL"));
    assert!(s.contains("all three objectives equal: true"), "{s}");
}

#[test]
fn verify_random_eight_streams() {
    for seed in 1..6 {
        let seed = seed.to_string();
        let o = tierplace(&["verify", "--seed", &seed, "--set", "scenario.n_tasks=8"]);
        let s = stdout(&o);
        assert_eq!(code(&o), 0, "{s}");
        assert!(s.contains("PASS oracle <= greedy"), "{s}");
    }
}

#[test]
fn verify_refuses_oversize_instance() {
    let o = tierplace(&["verify", "--set", "scenario.n_tasks=13"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bound is 12"));
}

#[test]
fn verify_reports_infeasibility_consistently() {
    let o = tierplace(&[
        "verify",
        "--set",
        "scenario.n_tasks=4",
        "--set",
        "scenario.tiers.edge.count=4",
        "--set",
        "scenario.deadline_s=0.000001",
    ]);
    let s = stdout(&o);
    assert_eq!(code(&o), 2, "{s}");
    assert!(s.contains("greedy           infeasible"), "{s}");
    assert!(s.contains("oracle           infeasible"), "{s}");
    assert!(s.contains("dual             infeasible"), "{s}");
    assert!(s.contains("PASS infeasibility reported consistently"), "{s}");
}

#[test]
fn out_dir_falls_back_to_env() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_tierplace"))
        .args(["run", "--set", "scenario.n_tasks=3"])
        .env(commands::OUT_ENV, dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(dir.path().join(RECORD_FILE).is_file());
}
