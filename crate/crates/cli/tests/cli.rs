use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rabi_core::io::csv::write_records;
use rabi_core::stats::PhotonStatistics;
use rabi_core::sweep::{Method, RootSummary, SweepRecord};
use rabi_core::{Parity, Phase};
use serde_json::Value;

fn rabi(args: &[&str]) -> Output {
    rabi_env(args, &[])
}

fn rabi_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rabi"));
    cmd.args(args).env_remove("RABI_WORKERS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid json")
}

/// Synthetic grid whose `r` peaks at `Δ = 2g²`, with `delta` spanning the ridge.
fn synthetic_records(reference: [f64; 3]) -> Vec<SweepRecord> {
    let gs = [1.0, 1.25, 1.5, 1.75, 2.0];
    let deltas: Vec<f64> = (0..41).map(|i| 0.5 * i as f64 + 0.5).collect();
    let mut out = Vec::new();
    for &d in &deltas {
        for &g in &gs {
            let peak = (reference[0] * g + reference[1]) * g + reference[2];
            let r = 1.0 - ((d - peak) / 4.0).powi(2);
            let stats = PhotonStatistics {
                mean_n: 1.0,
                var_n: 1.0,
                q_excess: 0.0,
                mean_x: 1.0,
                mean_p: 0.0,
                dx: 1.0,
                dp: 0.5,
                product: 0.5,
                r,
                overlap: 0.5,
                cov_xp: 0.0,
            };
            let lambda = g * (2.0 / d).sqrt();
            out.push(SweepRecord {
                delta: d,
                g,
                lambda,
                phase: Phase::from_lambda(lambda),
                root: Some(RootSummary { x_root: 0.0, energy: -g * g, residual: 0.0, parity: Parity::Minus }),
                stats: Some(stats),
                truncation_n: Some(40),
                method: Method::Spectral,
                error: None,
            });
        }
    }
    out
}

fn write_csv(path: &Path, records: &[SweepRecord]) {
    let file = fs::File::create(path).unwrap();
    write_records(file, records).unwrap();
}

#[test]
fn solve_validate_agrees_with_oracle() {
    let out = rabi(&["solve", "--delta", "1", "--g", "1", "--validate", "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = json(&out);
    assert_eq!(doc["validation"]["passed"], Value::Bool(true));
    for (name, v) in doc["validation"]["deltas"].as_object().unwrap() {
        assert!(v.as_f64().unwrap() < 1e-9, "{name} differs by {v}");
    }
}

#[test]
fn json_carries_every_statistic_config_and_version() {
    let out = rabi(&["solve", "--delta", "2", "--g", "1.5", "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = json(&out);
    let stats = doc["stats"].as_object().unwrap();
    for name in PhotonStatistics::FIELDS.iter().chain(["mandel_q"].iter()) {
        assert!(stats.contains_key(*name), "missing {name}");
    }
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["config"]["root_tolerance"], 1e-12);
    assert_eq!(doc["params"]["phase"], "superradiant");
}

#[test]
fn zero_coupling_is_the_vacuum() {
    let out = rabi(&["solve", "--delta", "1", "--g", "0", "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = json(&out);
    assert!((doc["root"]["energy"].as_f64().unwrap() + 1.0).abs() < 1e-14);
    assert_eq!(doc["stats"]["mean_n"].as_f64().unwrap(), 0.0);
    assert!((doc["stats"]["product"].as_f64().unwrap() - 0.5).abs() < 1e-14);
    assert_eq!(doc["stats"]["mandel_q"], Value::Null);
}

#[test]
fn text_solve_lists_fields() {
    let out = rabi(&["solve", "--delta", "1", "--g", "1"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for name in ["energy", "mean_n", "r", "overlap", "truncation_n"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "missing {name}");
    }
}

#[test]
fn oracle_subcommand_reports_parity() {
    let out = rabi(&["oracle", "--delta", "1", "--g", "1", "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = json(&out);
    assert!((doc["e0"].as_f64().unwrap() + 1.4365453921686457).abs() < 1e-9);
    assert!(doc["parity_expect"].as_f64().unwrap().abs() > 0.999);
}

#[test]
fn invalid_arguments_exit_2() {
    let cases: [&[&str]; 5] = [
        &["solve", "--delta", "0", "--g", "1"],
        &["solve", "--delta", "-1", "--g", "1"],
        &["solve", "--delta", "1"],
        &["bogus"],
        &["sweep", "--steps", "1"],
    ];
    for args in cases {
        let out = rabi(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
    }
    let out = rabi(&["solve", "--delta", "0", "--g", "1"]);
    assert!(stderr(&out).starts_with("error[invalid_params]"));
}

#[test]
fn solver_failure_exits_3() {
    let out = rabi(&["solve", "--delta", "1", "--g", "2", "--set", "n_cap=3"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).starts_with("error["));
}

#[test]
fn validation_mismatch_exits_4() {
    // a truncated state cannot match the converged oracle
    let out = rabi(&["solve", "--delta", "1", "--g", "3", "--validate", "--set", "state_tail_tolerance=0.05"]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    assert!(stderr(&out).starts_with("error[validation_mismatch]"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small grid\ndelta_lo = 0.5\ndelta_hi = 1.5\ng_lo = 0.5\ng_hi = 1\nsteps = 3\nformat = json\n")
        .unwrap();
    let out = rabi(&["sweep", "--config", cfg.to_str().unwrap(), "--g-steps", "2"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = json(&out);
    assert_eq!(doc["records"].as_array().unwrap().len(), 6);
    assert_eq!(doc["config"]["g"]["steps"], 2);

    fs::write(&cfg, "nonsense = 1\n").unwrap();
    let out = rabi(&["solve", "--config", cfg.to_str().unwrap(), "--delta", "1", "--g", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn workers_env_and_flag_give_identical_csv() {
    let grid = ["sweep", "--delta-lo", "0.5", "--delta-hi", "4", "--g-lo", "0.5", "--g-hi", "2", "--steps", "4"];
    let serial = rabi_env(&grid, &[("RABI_WORKERS", "1")]);
    let pooled = rabi_env(&grid, &[("RABI_WORKERS", "4")]);
    let mut flagged: Vec<&str> = grid.to_vec();
    flagged.extend(["--workers", "3"]);
    let flagged = rabi_env(&flagged, &[("RABI_WORKERS", "1")]);
    assert_eq!(code(&serial), 0);
    assert_eq!(serial.stdout, pooled.stdout);
    assert_eq!(serial.stdout, flagged.stdout);
    let bad = rabi_env(&grid, &[("RABI_WORKERS", "many")]);
    assert_eq!(code(&bad), 2);
}

#[test]
fn csv_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = rabi(&[
        "sweep",
        "--delta-lo",
        "0.2",
        "--delta-hi",
        "3",
        "--g-lo",
        "0.3",
        "--g-hi",
        "2",
        "--steps",
        "5",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let bytes = fs::read(&path).unwrap();
    let records = rabi_core::io::csv::read_records(bytes.as_slice()).unwrap();
    let mut again = Vec::new();
    write_records(&mut again, &records).unwrap();
    assert_eq!(bytes, again);
}

#[test]
fn fit_ridge_recovers_synthetic_curve() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ridge.csv");
    write_csv(&path, &synthetic_records([2.0, 0.0, 0.0]));
    let out = rabi(&["fit-ridge", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = json(&out);
    let coeffs: Vec<f64> = doc["coeffs"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    for (c, want) in coeffs.iter().zip([2.0, 0.0, 0.0]) {
        assert!((c - want).abs() < 1e-8, "{coeffs:?}");
    }
    assert!(doc["reference_curves"]["critical"]["rms_distance"].as_f64().unwrap() < 1e-8);

    let text = rabi(&["fit-ridge", path.to_str().unwrap()]);
    assert_eq!(code(&text), 0);
    assert!(stdout(&text).contains("vs 2g^2 - 1.5g + 0.6"));
}

#[test]
fn fit_ridge_with_two_columns_is_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("two.csv");
    let records: Vec<SweepRecord> =
        synthetic_records([2.0, 0.0, 0.0]).into_iter().filter(|r| r.g == 1.0 || r.g == 1.5).collect();
    write_csv(&path, &records);
    let out = rabi(&["fit-ridge", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).starts_with("error[degenerate_fit]"));
}

#[test]
fn fit_ridge_rejects_malformed_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "a,b\n1,2\n").unwrap();
    assert_eq!(code(&rabi(&["fit-ridge", path.to_str().unwrap()])), 2);
    assert_eq!(code(&rabi(&["fit-ridge", dir.path().join("missing.csv").to_str().unwrap()])), 2);
}

#[test]
fn render_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ridge.csv");
    write_csv(&csv, &synthetic_records([2.0, -1.5, 0.6]));
    let a = dir.path().join("a.svg");
    let b = dir.path().join("b.svg");
    for out in [&a, &b] {
        let o = rabi(&["render", csv.to_str().unwrap(), "--field", "r", "-o", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let svg = fs::read_to_string(&a).unwrap();
    assert_eq!(svg, fs::read_to_string(&b).unwrap());
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.trim_end().ends_with("</svg>"));
}

#[test]
fn render_constant_field_and_unknown_field() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ridge.csv");
    write_csv(&csv, &synthetic_records([2.0, 0.0, 0.0]));
    let out = dir.path().join("c.svg");
    let o = rabi(&["render", csv.to_str().unwrap(), "--field", "overlap", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = rabi(&["render", csv.to_str().unwrap(), "--field", "bogus", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).starts_with("error[unknown_field]"));
}

#[test]
fn sweep_svg_output() {
    let out = rabi(&[
        "sweep",
        "--delta-lo",
        "0.5",
        "--delta-hi",
        "1",
        "--g-lo",
        "0.5",
        "--g-hi",
        "1",
        "--steps",
        "3",
        "--format",
        "svg",
        "--field",
        "mean_n",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("</svg>"));
}
