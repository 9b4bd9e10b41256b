use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const STEP: &str = r#"{"v_minus": 4, "v_plus": 0, "breakpoints": [0], "values": []}"#;
const BARRIER: &str = r#"{"v_minus": 4, "v_plus": 0, "breakpoints": [0, 1], "values": [8]}"#;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steplike")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn identities_on_pure_step() {
    let dir = tempfile::tempdir().unwrap();
    let pot = write(dir.path(), "step.json", STEP);
    let out = run(&["identities", "--potential", pot.to_str().unwrap(), "--format", "json", "--seed", "7"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let reports = json(&out);
    let rows = reports.as_array().unwrap();
    assert_eq!(rows.len(), 4 * 50);
    for r in rows {
        for e in r["entries"].as_array().unwrap() {
            if let Some(v) = e["residual"].as_f64() {
                assert!(v <= 1e-12, "residual {v} in {r}");
            }
        }
    }
}

#[test]
fn pure_step_counts_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let pot = write(dir.path(), "step.json", STEP);
    for sheet in ["mm", "sum"] {
        let out = run(&["count", "--potential", pot.to_str().unwrap(), "--sheet", sheet, "--rmax", "30"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let rep = json(&out);
        assert_eq!(rep["predicted_slope"].as_f64(), Some(0.0));
        assert_eq!(rep["fitted_slope"].as_f64(), Some(0.0));
    }
}

#[test]
fn degenerate_rect_gives_empty_list() {
    let dir = tempfile::tempdir().unwrap();
    let pot = write(dir.path(), "barrier.json", BARRIER);
    let out = run(&["resonances", "--potential", pot.to_str().unwrap(), "--rect", "-5", "5", "0", "0", "--format", "json"]);
    assert!(out.status.success());
    assert_eq!(json(&out), Value::Array(vec![]));
}

#[test]
fn barrier_resonances_csv() {
    let dir = tempfile::tempdir().unwrap();
    let pot = write(dir.path(), "barrier.json", BARRIER);
    let out = run(&["resonances", "--potential", pot.to_str().unwrap(), "--sheet", "mm", "--rect", "-400", "400", "-400", "0"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert!(rows.len() >= 5, "{text}");
    for row in rows {
        let residual: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(residual < 1e-8);
    }
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let pot = write(dir.path(), "barrier.json", BARRIER);
    let p = pot.to_str().unwrap();
    let cases: [&[&str]; 3] = [
        &["identities", "--potential", p, "--samples", "10", "--seed", "3"],
        &["resonances", "--potential", p, "--rect", "-200", "200", "-200", "0", "--format", "json"],
        &["count", "--potential", p, "--sheet", "pm", "--rmax", "15"],
    ];
    for args in cases {
        let a = run(args);
        let b = run(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let pot = write(dir.path(), "barrier.json", BARRIER);
    let out_path = dir.path().join("out.csv");
    let cfg = serde_json::json!({
        "potential": pot,
        "points": [[3.0, 1.0]],
        "sheet": "mm",
        "format": "json",
        "out": out_path,
    });
    let cfg_path = write(dir.path(), "run.json", &cfg.to_string());
    let out = run(&["scatter", "--config", cfg_path.to_str().unwrap(), "--format", "csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("re_z,im_z,sheet"));
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn invalid_configs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let pot = write(dir.path(), "barrier.json", BARRIER);
    let bad = [
        serde_json::json!({ "potential": pot, "unknown_key": 1 }),
        serde_json::json!({ "potential": pot, "rect": [1.0, 0.0, 0.0, 1.0] }),
        serde_json::json!({ "potential": pot, "sheet": "xy" }),
        serde_json::json!({ "potential": pot, "ratio": 0.5 }),
        serde_json::json!({ "potential": pot, "phi": [4.0] }),
    ];
    for (i, cfg) in bad.iter().enumerate() {
        let path = write(dir.path(), &format!("bad{i}.json"), &cfg.to_string());
        let out = run(&["identities", "--config", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(1), "{cfg}");
        assert!(out.stdout.is_empty());
        let err: Value = serde_json::from_slice(&out.stderr).unwrap();
        assert!(err["error"].is_string());
    }
    let bad_pot = write(dir.path(), "badpot.json", r#"{"v_minus": 4, "v_plus": 0, "breakpoints": [1, 0], "values": [2]}"#);
    let out = run(&["identities", "--potential", bad_pot.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn inverse_check_on_pure_step() {
    let dir = tempfile::tempdir().unwrap();
    let pot = write(dir.path(), "step.json", STEP);
    let out = run(&["inverse-check", "--potential", pot.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json(&out);
    assert!(rep["round_trip"]["max_error"].as_f64().unwrap() <= 1e-10);
    assert!(rep["normalization"]["summary"].is_string());
}
