//! End-to-end checks of the command-line surface: golden output lines,
//! exit codes, and determinism for fixed flags and seed.

use std::process::Command;

fn wmds(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_wmds"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn cs_golden_line() {
    let out = wmds(&["cs", "--type", "A1", "--n", "3"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "1 + v*g1*e[-1]");
}

#[test]
fn info_reports_metaplectic_data() {
    let out = wmds(&["info", "--type", "A2", "--n", "4", "--out", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["n_alpha"], serde_json::json!([4, 4]));
    assert_eq!(v["dual_adjoint"], serde_json::json!(true));

    // Degenerate cover: Λ₀∨ = Λ∨.
    let out = wmds(&["info", "--type", "A1", "--n", "1", "--out", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["lambda0_index"], serde_json::json!(1));
    assert_eq!(v["lambda0_basis"], serde_json::json!([[1]]));
}

#[test]
fn usage_errors_exit_two() {
    let out = wmds(&["info", "--type", "Z9"]);
    assert_eq!(out.status.code(), Some(2));
    let out = wmds(&["verify", "nonsense", "--type", "A1", "--n", "3"]);
    assert_eq!(out.status.code(), Some(2));
    // Arithmetic suites without --q are usage errors too.
    let out = wmds(&["verify", "gauss", "--type", "A1", "--n", "3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_all_passes_and_is_deterministic() {
    let args = [
        "verify", "all", "--type", "A1", "--n", "3", "--q", "7", "--deg-max", "2", "--seed", "11",
    ];
    let first = wmds(&args);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stdout));
    let second = wmds(&args);
    assert_eq!(first.stdout, second.stdout, "byte-identical for fixed flags and seed");
}

#[test]
fn series_json_shape() {
    let out = wmds(&[
        "series", "--type", "A1", "--n", "3", "--q", "7", "--deg-max", "1", "--out", "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["monomial"], serde_json::json!([0]));
    assert!((rows[0]["coeff"]["re"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    // The x-coefficient sums 𝐠₁ over the 7 degree-1 places: |c| = 7·√7.
    let re = rows[1]["coeff"]["re"].as_f64().unwrap();
    let im = rows[1]["coeff"]["im"].as_f64().unwrap();
    let norm = (re * re + im * im).sqrt();
    assert!((norm - 7.0 * 7.0f64.sqrt()).abs() < 1e-6);
}

#[test]
fn glue_json_shape() {
    let out = wmds(&[
        "glue", "--type", "A1", "--n", "3", "--q", "7", "--tuple", "t", "--out", "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["tuple"], serde_json::json!(["t"]));
    assert_eq!(v["D"], serde_json::json!(0));
    let re = v["H"]["re"].as_f64().unwrap();
    let im = v["H"]["im"].as_f64().unwrap();
    assert!(((re * re + im * im).sqrt() - 7.0f64.sqrt()).abs() < 1e-9);
}

#[test]
fn rejected_parameters_have_messages() {
    // n ∤ q−1 is fatal: μ_n(F_q) is not full.
    let out = wmds(&["series", "--type", "A1", "--n", "4", "--q", "7", "--deg-max", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("q"), "constraint message present: {msg}");

    // 2n ∤ q−1 only warns, citing the constraint.
    let out = wmds(&["series", "--type", "A1", "--n", "2", "--q", "7", "--deg-max", "1"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("2n | q-1"));
}
