//! End-to-end tests of the relaycycle binary: exit codes, file formats,
//! determinism, and agreement with the library entry points.

mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use relaycycle::switching;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_relaycycle"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_plant(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const FIG2: &str = r#"{"num": [-1.0, 3.0], "den": [1.0, 3.0, 2.0]}"#;
const NO_ZERO: &str = r#"{"num": [0.0, 3.0], "den": [1.0, 3.0, 2.0]}"#;
const NEG_ZERO: &str = r#"{"num": [1.0, 3.0], "den": [1.0, 3.0, 2.0]}"#;

#[test]
fn analyze_reference_plant_writes_the_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let plant = write_plant(dir.path(), "plant.json", FIG2);
    let out = run_in(dir.path(), &["analyze", &plant]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["classification"], "SelfOscillation");
    assert!((doc["xi_cycle"].as_f64().unwrap() - 2.0).abs() < 1e-8);
    assert!((doc["half_period"].as_f64().unwrap() - 3.0f64.ln()).abs() < 1e-8);
    assert!((doc["period"].as_f64().unwrap() - 2.0 * 3.0f64.ln()).abs() < 1e-8);
    assert!((doc["half_map_multiplier"].as_f64().unwrap() + 1.0 / 9.0).abs() < 1e-8);
    assert!(doc["chattering_set"].is_null());
    assert_eq!(doc["plant_echo"]["den"][0], 1.0);
}

#[test]
fn analyze_classifies_the_other_zero_classes() {
    let dir = tempfile::tempdir().unwrap();
    let origin = write_plant(dir.path(), "origin.json", NO_ZERO);
    let out = run_in(dir.path(), &["analyze", &origin]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["classification"], "ConvergesToOrigin");
    assert!(doc["xi_cycle"].is_null());
    assert!(doc["half_period"].is_null());

    let chat = write_plant(dir.path(), "chat.json", NEG_ZERO);
    let out = run_in(dir.path(), &["analyze", &chat]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["classification"], "ConvergesToChatteringSet");
    assert_eq!(doc["chattering_set"][0], -1.0);
    assert_eq!(doc["chattering_set"][1], 1.0);
}

#[test]
fn exit_code_two_on_input_errors() {
    let dir = tempfile::tempdir().unwrap();

    // Missing file.
    let out = run_in(dir.path(), &["analyze", "nope.json"]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "input");

    // Non-monic denominator.
    let bad = write_plant(
        dir.path(),
        "bad.json",
        r#"{"num": [-1.0, 3.0], "den": [2.0, 3.0, 2.0]}"#,
    );
    assert_eq!(run_in(dir.path(), &["analyze", &bad]).status.code(), Some(2));

    // Unstable denominator.
    let unstable = write_plant(
        dir.path(),
        "unstable.json",
        r#"{"num": [0.0, 1.0], "den": [1.0, 0.0, 1.0]}"#,
    );
    let out = run_in(dir.path(), &["analyze", &unstable]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"]["message"]
        .as_str()
        .unwrap()
        .contains("Hurwitz"));

    // Bad map range.
    let plant = write_plant(dir.path(), "plant.json", FIG2);
    let out = run_in(
        dir.path(),
        &["map", &plant, "--xi-min", "5", "--xi-max", "1"],
    );
    assert_eq!(out.status.code(), Some(2));

    // Bad x0.
    let out = run_in(dir.path(), &["simulate", &plant, "--x0", "1;2"]);
    assert_eq!(out.status.code(), Some(2));

    // Empty kappa list entry.
    let out = run_in(dir.path(), &["sweep", &plant, "--kappa-list", "1,,2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_code_three_on_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    // A shallow negative zero descends by only 2|kappa| = 0.02 per iteration,
    // so reaching the chattering set from the default seed takes ~50 steps;
    // capping at 10 forces the iteration-budget failure.
    let plant = write_plant(
        dir.path(),
        "shallow.json",
        r#"{"num": [0.01, 3.0], "den": [1.0, 3.0, 2.0]}"#,
    );
    let out = run_in(dir.path(), &["analyze", &plant, "--max-iter", "10"]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "numeric");
    assert!(err["error"]["message"]
        .as_str()
        .unwrap()
        .contains("exceeded 10 iterations"));

    // The same plant succeeds with the default iteration budget.
    let out = run_in(dir.path(), &["analyze", &plant]);
    assert!(out.status.success());
}

#[test]
fn map_reproduces_reference_curves_and_marks_unsupported_columns() {
    let dir = tempfile::tempdir().unwrap();
    let plant = write_plant(dir.path(), "plant.json", FIG2);
    let out = run_in(
        dir.path(),
        &[
            "map", &plant, "--xi-min", "-1", "--xi-max", "5", "--n", "7",
        ],
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "xi,tau_plus,f_plus,f_plus_prime,f_plus_second_or_nan"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 7);

    // Boundary row xi = -1: tau = 0, f = -1, derivative column is nan.
    assert_eq!(rows[0][0], "-1");
    assert_eq!(rows[0][1], "0");
    assert_eq!(rows[0][2], "-1");
    assert_eq!(rows[0][3], "nan");

    // Grid point xi = 1: tau = ln(7/3).
    let tau: f64 = rows[2][1].parse().unwrap();
    assert!((tau - (7.0f64 / 3.0).ln()).abs() < 1e-10);

    // Spot-check a row against a direct library call.
    let p = relaycycle::plant::Plant::new(
        relaycycle::plant::PlantSpec::from_json_str(FIG2).unwrap(),
    )
    .unwrap();
    let f: f64 = rows[4][2].parse().unwrap();
    let xi: f64 = rows[4][0].parse().unwrap();
    assert_eq!(f, switching::f_plus(&p, xi).unwrap());

    // Complex-pole plant: second-derivative column is nan everywhere.
    let complex = write_plant(
        dir.path(),
        "complex.json",
        r#"{"num": [-1.0, 1.0], "den": [1.0, 2.0, 2.0]}"#,
    );
    let out = run_in(
        dir.path(),
        &["map", &complex, "--xi-min", "0", "--xi-max", "2", "--n", "3"],
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        assert!(line.ends_with(",nan"), "expected nan sentinel in {line}");
    }
}

#[test]
fn simulate_writes_trace_and_events() {
    let dir = tempfile::tempdir().unwrap();
    let plant = write_plant(dir.path(), "plant.json", FIG2);
    let out = run_in(
        dir.path(),
        &[
            "simulate", &plant, "--x0", "2,0", "--t-max", "5", "--out", "run.csv",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = fs::read_to_string(dir.path().join("run.csv")).unwrap();
    assert!(csv.starts_with("t,x1,x2,u\n"));
    assert!(csv.lines().count() > 100);

    let events: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run.events.json")).unwrap())
            .unwrap();
    let crossings: Vec<f64> = events
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["type"] == "Crossing")
        .map(|e| e["x1"].as_f64().unwrap())
        .collect();
    assert!(crossings.len() >= 4);
    for (i, x1) in crossings.iter().enumerate() {
        let expect = if i % 2 == 0 { -2.0 } else { 2.0 };
        assert!((x1 - expect).abs() < 1e-4, "crossing {i} at {x1}");
    }
}

#[test]
fn simulate_negative_zero_reports_chattering_stop() {
    let dir = tempfile::tempdir().unwrap();
    let plant = write_plant(dir.path(), "plant.json", NEG_ZERO);
    let out = run_in(
        dir.path(),
        &["simulate", &plant, "--x0", "3,0", "--out", "chat.csv"],
    );
    assert!(out.status.success());
    let events = fs::read_to_string(dir.path().join("chat.events.json")).unwrap();
    assert!(events.contains("SlidingEnter"));
    assert!(events.contains("ChatteringStop"));
}

#[test]
fn simulate_forced_sign_diagnostic_mode() {
    let dir = tempfile::tempdir().unwrap();
    let plant = write_plant(dir.path(), "plant.json", FIG2);
    // Sink of the +1 field is (-5.5, -1.5); pinning the relay there holds it.
    let out = run_in(
        dir.path(),
        &[
            "simulate", &plant, "--x0", "-5.5,-1.5", "--t-max", "1", "--force-sign", "1",
            "--out", "pinned.csv",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("pinned.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    let cols: Vec<f64> = last.split(',').map(|v| v.parse().unwrap()).collect();
    assert!((cols[1] + 5.5).abs() < 1e-9 && (cols[2] + 1.5).abs() < 1e-9);
    let events = fs::read_to_string(dir.path().join("pinned.events.json")).unwrap();
    assert!(!events.contains("Crossing"));
}

#[test]
fn sweep_classifications_flip_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let plant = write_plant(dir.path(), "plant.json", FIG2);
    let out = run_in(
        dir.path(),
        &["sweep", &plant, "--kappa-list", "1,0,-1"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "kappa,classification,xi_cycle,half_period");
    assert!(rows[1].starts_with("1,SelfOscillation,"));
    assert!(rows[2].starts_with("0,ConvergesToOrigin,nan,nan"));
    assert!(rows[3].starts_with("-1,ConvergesToChatteringSet,nan,nan"));

    // The kappa = 1 row carries the reference fixed point.
    let cols: Vec<&str> = rows[1].split(',').collect();
    let xi: f64 = cols[2].parse().unwrap();
    assert!((xi - 2.0).abs() < 1e-8);

    // Continuity probe: adjacent kappa values give nearby fixed points.
    let out = run_in(
        dir.path(),
        &["sweep", &plant, "--kappa-list", "0.5,0.25"],
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let xi: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(xi[0] > 0.0 && xi[1] > 0.0);
    assert!((xi[0] - xi[1]).abs() <= 0.5 * xi[0].max(xi[1]));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let plant = write_plant(dir.path(), "plant.json", FIG2);

    let a = run_in(dir.path(), &["analyze", &plant]);
    let b = run_in(dir.path(), &["analyze", &plant]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);

    let map_args = &["map", &plant, "--xi-min", "-2", "--xi-max", "8", "--n", "33"];
    let a = run_in(dir.path(), map_args);
    let b = run_in(dir.path(), map_args);
    assert_eq!(a.stdout, b.stdout);

    for name in ["a", "b"] {
        let out = run_in(
            dir.path(),
            &[
                "simulate", &plant, "--x0", "2,0", "--t-max", "3",
                "--out", &format!("{name}.csv"),
            ],
        );
        assert!(out.status.success());
    }
    assert_eq!(
        fs::read(dir.path().join("a.csv")).unwrap(),
        fs::read(dir.path().join("b.csv")).unwrap()
    );
    assert_eq!(
        fs::read(dir.path().join("a.events.json")).unwrap(),
        fs::read(dir.path().join("b.events.json")).unwrap()
    );
}

#[test]
fn env_tolerance_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let plant = write_plant(dir.path(), "plant.json", FIG2);
    let out = bin()
        .current_dir(dir.path())
        .env("RELAYCYCLE_TOL", "not-a-number")
        .args(["analyze", &plant])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .current_dir(dir.path())
        .env("RELAYCYCLE_TOL", "1e-10")
        .args(["analyze", &plant])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["tolerances"]["rel_tol"], 1e-10);
}
