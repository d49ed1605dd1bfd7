use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_elliptic-ainf");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("ELLIPTIC_AINF_TOL")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn value(row: &Value) -> (f64, f64) {
    (
        row["value"][0].as_f64().unwrap(),
        row["value"][1].as_f64().unwrap(),
    )
}

#[test]
fn eis_rapid_record() {
    let out = run(&["eis", "--tau", "0,2", "--n", "4", "--method", "rapid"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["command"], "eis");
    let rows = doc["results"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0]["tail_bound"].as_f64().unwrap() <= 1e-10);
    let (re, im) = value(&rows[0]);
    assert!(re > 2.0 && im.abs() < 1e-12);
}

#[test]
fn eis_vanishes_at_i() {
    let out = run(&["eis", "--tau", "0,1", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    for row in json(&out)["results"].as_array().unwrap() {
        if row["index"]["quantity"] == "e*" {
            let (re, im) = value(row);
            assert!(re.abs() < 1e-10 && im.abs() < 1e-10);
        }
    }
}

#[test]
fn eis_odd_weight_is_a_usage_error() {
    let out = run(&["eis", "--n", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n must be even ≥ 2"));
    assert!(out.stdout.is_empty());
}

#[test]
fn json_key_order_is_fixed() {
    let out = run(&["eis", "--tau", "0,2", "--n", "4", "--method", "rapid"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let pos = |k: &str| text.find(&format!("\"{k}\"")).unwrap();
    assert!(pos("command") < pos("inputs"));
    assert!(pos("inputs") < pos("results"));
    assert!(pos("index") < pos("value"));
    assert!(pos("value") < pos("tail_bound"));
}

#[test]
fn m_table_json_and_csv_agree() {
    let out = run(&[
        "m-table", "--tau", "0,2", "--n-max", "5", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out)["results"].as_array().unwrap().clone();
    assert!(rows.len() > 12);
    assert!(rows.iter().all(|r| r["index"]["family"].is_string()));

    let out = run(&["m-table", "--tau", "0,2", "--n-max", "5", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("family,exponents,arity,inputs,output,re,im,tail_bound")
    );
    let body: Vec<&str> = lines.collect();
    assert_eq!(body.len(), rows.len());
    for (line, row) in body.iter().zip(&rows) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[0], row["index"]["family"].as_str().unwrap());
        assert_eq!(cells[2], row["index"]["arity"].to_string());
        let re: f64 = cells[5].parse().unwrap();
        assert!((re - value(row).0).abs() <= 1e-15 * re.abs().max(1.0));
    }
}

#[test]
fn m_table_odd_bound_has_binary_products_only() {
    let out = run(&["m-table", "--tau", "0,2", "--n-max", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out)["results"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r["index"]["arity"] == 2));
}

#[test]
fn verify_all_passes() {
    let out = run(&["verify", "--all"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = json(&out);
    let suite = doc["suite"].as_array().unwrap();
    assert!(suite.len() > 1000);
    assert!(suite.iter().all(|r| r["passed"] == true));
}

#[test]
fn verify_only_cusp_reports_cusp_checks() {
    let out = run(&["verify", "--only", "cusp", "--im-tau", "20"]);
    let doc = json(&out);
    let suite = doc["suite"].as_array().unwrap();
    assert!(!suite.is_empty());
    assert!(suite.iter().all(|r| r["name"] == "cusp_limit"));
    assert!(suite
        .iter()
        .all(|r| r["inputs"]["im_tau"] == serde_json::json!([20.0])));
    let failed = suite.iter().any(|r| r["passed"] == false);
    assert_eq!(out.status.code(), Some(if failed { 1 } else { 0 }));
}

#[test]
fn verify_forced_failure() {
    let out = run(&["verify", "--only", "eis,zeros", "--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("FAIL"));
    assert!(stderr.contains("residual"));
    let doc = json(&out);
    for r in doc["suite"].as_array().unwrap() {
        let t = r["tolerance"].as_f64().unwrap();
        assert!((t / 1e-30 - 1.0).abs() < 1e-12);
    }
}

#[test]
fn environment_tolerance() {
    let out = Command::new(BIN)
        .args(["eis", "--tau", "0,2", "--n", "4", "--method", "rapid"])
        .env("ELLIPTIC_AINF_TOL", "1e-6")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let tol = json(&out)["inputs"]["tol"].as_f64().unwrap();
    assert!((tol / 1e-6 - 1.0).abs() < 1e-12);

    let out = Command::new(BIN)
        .args(["eis", "--n", "4"])
        .env("ELLIPTIC_AINF_TOL", "nope")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn trees_command() {
    let out = run(&["trees", "--exponents", "1,0,0,0", "--sign", "2,3"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert!(!doc["results"].as_array().unwrap().is_empty());
    assert!(doc["suite"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["passed"] == true));
}

#[test]
fn usage_errors() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        run(&["eis", "--tau", "0,-1", "--n", "4"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["m-table", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--only", "nothing"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
