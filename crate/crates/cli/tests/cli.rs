use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn drnli(args: &[&str], scenario: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drnli"))
        .args(args)
        .arg("--scenario")
        .arg(scenario)
        .arg("--out")
        .arg(out)
        .output()
        .expect("run drnli")
}

fn write_scenario(dir: &TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("scenario.json");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn nli_writes_csv_and_json() {
    let dir = TempDir::new().unwrap();
    let out = drnli(&["nli"], &scenario("no_pump.json"), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("nli_report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 10);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("nli_report.json")).unwrap()).unwrap();
    assert_eq!(json["eta_total"].as_array().unwrap().len(), 9);
}

#[test]
fn output_is_byte_identical_across_runs() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [&a, &b] {
        assert_eq!(drnli(&["nli"], &scenario("reference.json"), dir.path()).status.code(), Some(0));
        assert_eq!(drnli(&["fit"], &scenario("reference.json"), dir.path()).status.code(), Some(0));
    }
    for name in ["nli_report.csv", "nli_report.json", "fit_report.json"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name} differs between runs");
    }
}

#[test]
fn solve_and_sweep_layouts() {
    let dir = TempDir::new().unwrap();
    let steps = ["solve", "--steps", "150"];
    assert_eq!(drnli(&steps, &scenario("no_pump.json"), dir.path()).status.code(), Some(0));
    let evolution = fs::read_to_string(dir.path().join("power_evolution.csv")).unwrap();
    assert_eq!(evolution.lines().count(), 152);

    let out = drnli(&["sweep", "--sweep", "-4:4:1"], &scenario("no_pump.json"), dir.path());
    assert_eq!(out.status.code(), Some(0));
    let sweep = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = sweep.lines();
    assert_eq!(lines.next().unwrap(), "channel,offset_db,f_i_hz,launch_power_dbm,snr_nli_db,snr_db");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9 * 9);
    for ch in 0..9 {
        assert_eq!(rows.iter().filter(|r| r.starts_with(&format!("{ch},"))).count(), 9);
    }
}

#[test]
fn compare_gate_sets_exit_code() {
    let dir = TempDir::new().unwrap();
    let pass = drnli(&["compare"], &scenario("minimal.json"), dir.path());
    assert_eq!(pass.status.code(), Some(0), "{}", String::from_utf8_lossy(&pass.stderr));
    assert!(String::from_utf8_lossy(&pass.stdout).contains("PASS"));
    assert_eq!(fs::read_to_string(dir.path().join("compare_report.csv")).unwrap().lines().count(), 2);

    let fail = drnli(&["compare", "--gate-db", "0"], &scenario("minimal.json"), dir.path());
    assert_eq!(fail.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&fail.stdout).contains("FAIL"));
}

#[test]
fn parse_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let missing = drnli(&["nli"], &dir.path().join("absent.json"), dir.path());
    assert_eq!(missing.status.code(), Some(2));

    let bad_unit = write_scenario(
        &dir,
        r#"{ "fiber": { "length": "80 furlongs", "attenuation": 0.2, "beta2": -21.7, "gamma": 1.3 },
             "channels": [ { "frequency": 193.4, "bandwidth": 64, "power": 0 } ] }"#,
    );
    let out = drnli(&["nli"], &bad_unit, dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error (parse)"));

    let bad_sweep = drnli(&["sweep", "--sweep", "1:2"], &scenario("minimal.json"), dir.path());
    assert_eq!(bad_sweep.status.code(), Some(2));
}

#[test]
fn validation_errors_exit_with_three() {
    let dir = TempDir::new().unwrap();
    let pump_in_band = write_scenario(
        &dir,
        r#"{ "fiber": { "length": 80, "attenuation": 0.2, "beta2": -21.7, "gamma": 1.3, "raman_slope": 0.028 },
             "channels": { "count": 5, "center": 193.4, "spacing": 100, "bandwidth": 100, "power": 0 },
             "pumps": [ { "frequency": 193.4, "power": 500, "direction": "backward" } ] }"#,
    );
    let out = drnli(&["nli"], &pump_in_band, dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pump 0"));

    let few_steps = drnli(&["solve", "--steps", "5"], &scenario("minimal.json"), dir.path());
    assert_eq!(few_steps.status.code(), Some(3));
    assert!(!dir.path().join("power_evolution.csv").exists());
}

#[test]
fn numerical_failure_exits_with_four() {
    let dir = TempDir::new().unwrap();
    let runaway = write_scenario(
        &dir,
        r#"{ "fiber": { "length": 80, "attenuation": 0.2, "beta2": -21.7, "gamma": 1.3, "raman_slope": 0.028 },
             "channels": { "count": 3, "center": 193.4, "spacing": 100, "bandwidth": 100, "power": 0 },
             "pumps": [ { "frequency": 206.6, "power": "1000000 W", "direction": "backward" } ],
             "solver": { "steps": 100, "max_refinements": 1 } }"#,
    );
    let out = drnli(&["solve"], &runaway, dir.path());
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}
