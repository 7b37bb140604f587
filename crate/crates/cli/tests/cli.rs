use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use wallach_core::curvature::gamma;
use wallach_core::numeric::logspace;
use wallach_core::{Axis, CurveId, Metric, SampleFlags};

fn wallach(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wallach"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json_out(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

/// Parses a CSV with a header row into (header, rows).
fn read_csv(text: &str) -> (String, Vec<Vec<f64>>) {
    assert!(!text.contains('\r'), "LF line endings only");
    let mut lines = text.lines();
    let header = lines.next().expect("header").to_string();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn s3_samples_lie_on_unit_volume() {
    let out = wallach(&[
        "sample-curve",
        "--curve",
        "s3",
        "--t-min",
        "0.01",
        "--t-max",
        "100",
        "--n",
        "500",
    ]);
    assert_eq!(code(&out), 0);
    let (header, rows) = read_csv(&stdout(&out));
    assert_eq!(header, "t,x1,x2,x3");
    assert_eq!(rows.len(), 500);
    for r in &rows {
        assert!((r[1] * r[2] * r[3] - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn csv_uses_seventeen_significant_digits() {
    let out = wallach(&["sample-curve", "--curve", "I1", "--n", "3"]);
    let text = stdout(&out);
    let first = text.lines().nth(1).unwrap();
    for field in first.split(',') {
        let mantissa = field.split('e').next().unwrap().replace(['-', '.'], "");
        assert_eq!(mantissa.len(), 17, "{field}");
    }
}

#[test]
fn kahler_curve_needs_one_sixth() {
    let out = wallach(&["sample-curve", "--curve", "l3", "--a", "0.2"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("1/6"));
    assert_eq!(
        code(&wallach(&["sample-curve", "--curve", "l3", "--a", "1/6"])),
        0
    );
    assert_eq!(
        code(&wallach(&[
            "sample-curve",
            "--curve",
            "l3",
            "--a",
            "0.2",
            "--force-kahler"
        ])),
        0
    );
}

#[test]
fn r_curve_needs_a() {
    assert_eq!(code(&wallach(&["sample-curve", "--curve", "r1i"])), 2);
    assert_eq!(code(&wallach(&["sample-curve", "--curve", "q7"])), 2);
    assert_eq!(
        code(&wallach(&["sample-curve", "--curve", "s1", "--untrimmed"])),
        2
    );
}

#[test]
fn r1_branch_ends_at_p12() {
    // The branch carrying the factor t on x1 meets r2 at P12 = (1/2, 1/2, 4) when a = 1/8.
    let out = wallach(&[
        "sample-curve",
        "--curve",
        "r1i",
        "--a",
        "0.125",
        "--t-max",
        "0.125",
    ]);
    assert_eq!(code(&out), 0);
    let (_, rows) = read_csv(&stdout(&out));
    let last = rows.last().unwrap();
    assert_eq!(last[0], 0.125);
    for (got, want) in last[1..].iter().zip([0.5, 0.5, 4.0]) {
        assert!((got - want).abs() <= 1e-12, "{last:?}");
    }
}

#[test]
fn curve_csv_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("s2.csv");
    let out = wallach(&[
        "sample-curve",
        "--curve",
        "s2",
        "--t-min",
        "0.05",
        "--t-max",
        "20",
        "--n",
        "64",
        "--out",
        path_str(&file),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let (_, rows) = read_csv(&fs::read_to_string(&file).unwrap());

    let id: CurveId = "s2".parse().unwrap();
    let ts = logspace(0.05, 20.0, 64);
    let samples = id.sample_grid(&ts, None, SampleFlags::default()).unwrap();
    assert_eq!(rows.len(), samples.len());
    for (row, s) in rows.iter().zip(&samples) {
        assert_eq!(row[0], s.t);
        assert_eq!(row[1..], s.m.coords());
        let parsed = Metric::new(row[1], row[2], row[3]).unwrap();
        assert_eq!(gamma(Axis::X2, &parsed), gamma(Axis::X2, &s.m));
    }
}

#[test]
fn curve_json_record() {
    let out = wallach(&[
        "sample-curve",
        "--curve",
        "r2j",
        "--a",
        "1/6",
        "--n",
        "5",
        "--t-max",
        "0.1",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let v = json_out(&out);
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["space"]["a"].as_f64().unwrap(), 1.0 / 6.0);
    assert_eq!(v["payload"]["kind"], "curve_samples");
    assert_eq!(v["payload"]["data"]["curve"], "r2j");
    assert_eq!(v["payload"]["data"]["samples"].as_array().unwrap().len(), 5);
}

#[test]
fn integrate_stationary_point() {
    let out = wallach(&["integrate", "--x0", "1,1,1", "--a", "0.3", "--t-end", "5"]);
    assert_eq!(code(&out), 0);
    let (header, rows) = read_csv(&stdout(&out));
    assert_eq!(header, "time,x1,x2,x3,volume_drift");
    assert!(rows.len() >= 2);
    assert_eq!(rows.last().unwrap()[0], 5.0);
    for r in &rows {
        for x in &r[1..4] {
            assert!((x - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn integrate_rk4_fixed_grid() {
    let out = wallach(&[
        "integrate",
        "--x0",
        "1,1.2,1.5",
        "--a",
        "0.3",
        "--t-end",
        "1",
        "--method",
        "rk4",
        "--dt",
        "0.01",
        "--store-every",
        "10",
    ]);
    assert_eq!(code(&out), 0);
    let (_, rows) = read_csv(&stdout(&out));
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r[4] <= 1e-9));
    assert_eq!(
        code(&wallach(&[
            "integrate",
            "--x0",
            "1,1,1",
            "--a",
            "0.3",
            "--method",
            "rk4",
            "--rel-tol",
            "1e-8"
        ])),
        2
    );
}

#[test]
fn sectional_positivity_is_lost_and_run_truncates() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("traj.csv");
    let out = wallach(&[
        "integrate",
        "--x0",
        "0.95,0.92,1.145",
        "--a",
        "0.166666",
        "--t-end",
        "30",
        "--events",
        "--out",
        path_str(&file),
    ]);
    assert_eq!(code(&out), 3);
    let (_, rows) = read_csv(&fs::read_to_string(&file).unwrap());
    assert!(rows.len() > 10);
    let events = fs::read_to_string(dir.path().join("traj.events.csv")).unwrap();
    let mut lines = events.lines();
    assert_eq!(lines.next(), Some("time,kind,k,x1,x2,x3"));
    let gamma_events: Vec<&str> = lines.filter(|l| l.contains(",gamma_zero,")).collect();
    assert!(!gamma_events.is_empty());
    for e in gamma_events {
        let f: Vec<&str> = e.split(',').collect();
        let k = Axis::new(f[2].parse().unwrap()).unwrap();
        let m = Metric::new(
            f[3].parse().unwrap(),
            f[4].parse().unwrap(),
            f[5].parse().unwrap(),
        )
        .unwrap();
        assert!(gamma(k, &m).abs() <= 1e-10);
    }
}

#[test]
fn truncated_json_is_flagged() {
    let out = wallach(&[
        "integrate",
        "--x0",
        "0.95,0.92,1.145",
        "--a",
        "1/6",
        "--t-end",
        "30",
        "--events",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 3);
    let v = json_out(&out);
    assert_eq!(v["payload"]["kind"], "trajectory");
    assert_eq!(v["payload"]["data"]["truncated"], true);
    assert!(v["payload"]["data"]["error"].is_string());
    let events = v["payload"]["data"]["events"].as_array().unwrap();
    assert!(events.iter().any(|e| e["kind"]["kind"] == "gamma_zero"));
}

#[test]
fn ricci_positivity_is_kept_at_a_03() {
    let out = wallach(&[
        "integrate",
        "--x0",
        "0.9,1.0,1.2",
        "--a",
        "0.3",
        "--t-end",
        "50",
        "--events",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let v = json_out(&out);
    assert_eq!(v["payload"]["data"]["truncated"], false);
    let events = v["payload"]["data"]["events"].as_array().unwrap();
    assert!(events.iter().all(|e| e["kind"]["kind"] != "lambda_zero"));
}

#[test]
fn integrate_rejects_bad_input() {
    assert_eq!(
        code(&wallach(&["integrate", "--x0", "1,1", "--a", "0.3"])),
        2
    );
    assert_eq!(
        code(&wallach(&["integrate", "--x0", "1,-1,1", "--a", "0.3"])),
        2
    );
    assert_eq!(
        code(&wallach(&["integrate", "--x0", "1,1,1", "--a", "0.7"])),
        2
    );
    assert_eq!(
        code(&wallach(&[
            "integrate",
            "--x0",
            "1,1,1",
            "--a",
            "0.3",
            "--t-end",
            "0"
        ])),
        2
    );
}

#[test]
fn classify_labels() {
    let v = json_out(&wallach(&["classify", "--x", "1,1,1", "--a", "0.166667"]));
    assert_eq!(v["payload"]["kind"], "classify_result");
    assert_eq!(v["payload"]["data"]["label"], "positive_sectional");
    let v = json_out(&wallach(&["classify", "--x", "1,1,10", "--a", "0.166667"]));
    assert_eq!(v["payload"]["data"]["label"], "mixed_ricci");
    assert_eq!(v["payload"]["data"]["ricci_positive"], false);
    assert_eq!(code(&wallach(&["classify", "--x", "0,1,1"])), 2);
    assert_eq!(
        code(&wallach(&["classify", "--x", "0,1,1", "--a", "0.2"])),
        2
    );
}

fn equilibria(a: &str) -> Vec<Value> {
    let out = wallach(&["equilibria", "--a", a]);
    assert_eq!(code(&out), 0);
    json_out(&out)["payload"]["data"]["entries"]
        .as_array()
        .unwrap()
        .clone()
}

#[test]
fn equilibria_at_one_sixth() {
    let e = equilibria("0.166667");
    assert_eq!(e.len(), 4);
    assert_eq!(e[0]["name"], "O0");
    assert_eq!(e[0]["kind"], "unstable_node");
    for saddle in &e[1..] {
        assert_eq!(saddle["kind"], "hyperbolic_saddle");
        assert_eq!(saddle["in_sigma_s"], false);
    }
    assert!(e.iter().all(|x| x["in_sigma_r"] == true));
}

#[test]
fn equilibria_at_quarter_and_beyond() {
    let e = equilibria("0.25");
    assert_eq!(e.len(), 1);
    assert_eq!(e[0]["kind"], "degenerate_linear_zero");
    let e = equilibria("0.3");
    assert_eq!(e[0]["kind"], "stable_node");
    assert!(e.iter().all(|x| x["in_sigma_s"] == true));
    assert_eq!(code(&wallach(&["equilibria", "--a", "0.5"])), 2);
    assert_eq!(code(&wallach(&["equilibria", "--a", "0"])), 2);
}

#[test]
fn verify_theorem1_passes() {
    let out = wallach(&["verify", "--suite", "theorem1"]);
    assert_eq!(code(&out), 0);
    let v = json_out(&out);
    assert_eq!(v["payload"]["kind"], "verify_report");
    assert_eq!(v["payload"]["data"]["passed"], true);
    assert!(!v["payload"]["data"]["checks"]
        .as_array()
        .unwrap()
        .is_empty());
}

#[test]
fn verify_inclusion_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (f1, f2) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for f in [&f1, &f2] {
        let out = wallach(&[
            "verify",
            "--suite",
            "inclusion",
            "--a",
            "0.45",
            "--seed",
            "7",
            "--out",
            path_str(f),
        ]);
        assert_eq!(code(&out), 0);
    }
    let (a, b) = (fs::read(&f1).unwrap(), fs::read(&f2).unwrap());
    assert_eq!(a, b);
    let v: Value = serde_json::from_slice(&a).unwrap();
    let checks = v["payload"]["data"]["checks"].as_array().unwrap();
    let violations = checks
        .iter()
        .find(|c| c["name"] == "inclusion_violations")
        .unwrap();
    assert_eq!(violations["measured"].as_f64(), Some(0.0));
}

#[test]
fn verify_kahler_needs_one_sixth() {
    assert_eq!(
        code(&wallach(&["verify", "--suite", "kahler", "--a", "0.2"])),
        2
    );
    assert_eq!(
        code(&wallach(&["verify", "--suite", "kahler", "--a", "1/6"])),
        0
    );
    assert_eq!(code(&wallach(&["verify", "--suite", "nonsense"])), 2);
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(code(&wallach(&["integrate", "--bogus"])), 2);
    assert_eq!(code(&wallach(&[])), 2);
    assert_eq!(code(&wallach(&["--help"])), 0);
}
