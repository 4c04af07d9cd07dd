use std::path::PathBuf;
use std::process::{Command, Output};

fn newtonsum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_newtonsum")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let out = newtonsum(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Set `UPDATE_GOLDEN=1` to rewrite the files after an intended change.
fn check_golden(name: &str, args: &[&str]) {
    let out = newtonsum(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &out.stdout).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(stdout(&out), expected, "golden mismatch for {name}");
}

#[test]
fn analyze_reports_quadric_invariants() {
    let out = newtonsum(&["analyze", "x*y+z*u"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("sigma = 2,"), "{text}");
    assert!(text.contains("kappa = 3"));
    assert!(text.contains("(dim 1)"));

    let v = json(&["analyze", "x*y+z*u", "--json"]);
    assert_eq!(v["sigma"], "2/1");
    assert_eq!(v["t_star"], "1/2");
    assert_eq!(v["kappa"], 3);
    assert_eq!(v["f0_dim"], 1);
    assert_eq!(v["facets"].as_array().unwrap().len(), 8);
}

#[test]
fn verify_formula_monomial_passes() {
    let out = newtonsum(&["verify-formula", "x*y", "--prime", "3", "--powers", "1..3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).matches(" pass").count(), 3);

    let v = json(&["verify-formula", "x*y", "-p", "3", "--powers", "1..3", "--json"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        assert_eq!(row["verdict"], "pass");
        assert!(row["tail"].as_str().unwrap().contains('/'));
        assert!(row["T"].as_u64().unwrap() > 0);
        assert!(row["lhs"]["re"].is_f64() && row["rhs"]["im"].is_f64());
    }
}

#[test]
fn verify_formula_degenerate_prime_is_not_applicable() {
    let v = json(&["verify-formula", "x^2 + y^3", "-p", "3", "-m", "1", "--json"]);
    assert_eq!(v["rows"][0]["verdict"], "not-applicable");
    assert!(!v["degenerate_faces"].as_array().unwrap().is_empty());
}

#[test]
fn fixed_truncation_level_is_honoured() {
    let v = json(&["verify-formula", "x*y", "-p", "5", "-m", "2", "--T", "7", "--json"]);
    assert_eq!(v["rows"][0]["T"], 7);
    assert_eq!(v["rows"][0]["verdict"], "pass");
}

#[test]
fn sum_of_linear_form_vanishes() {
    let out = newtonsum(&["sum", "x", "--prime", "5", "--power", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("S(5^2) = 0.000000e0"));
    let v = json(&["sum", "x*y", "-p", "3", "-m", "2", "--json"]);
    assert!((v[0]["sum"]["value"]["re"].as_f64().unwrap() - 1.0 / 9.0).abs() < 1e-12);
}

#[test]
fn torus_sum_defaults_to_whole_polynomial() {
    let v = json(&["esum", "x*y + z*u", "--primes", "5,7", "--json"]);
    for (row, p) in v.as_array().unwrap().iter().zip([5.0f64, 7.0]) {
        assert_eq!(row["restriction"], "x*y + z*u");
        assert!((row["abs"].as_f64().unwrap() - 1.0 / (p - 1.0).powi(2)).abs() < 1e-12);
    }
}

#[test]
fn nu_check_reports_findings_without_failing() {
    let out = newtonsum(&["verify-nu", "x*y + z*u", "--T", "8", "--samples", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&["verify-nu", "x*y + z*u", "--T", "8", "--samples", "50", "--json"]);
    assert!(v["exact_violations"].as_array().unwrap().is_empty());
    let weak = v["weak_violations"].as_array().unwrap();
    assert!(weak.iter().any(|r| r["k"] == serde_json::json!([1, 1, 1, 1]) && r["rhs_weak"] == "5/1"));
    let csv = stdout(&newtonsum(&["verify-nu", "x*y + z*u", "--T", "8", "--csv", "--samples", "0"]));
    assert!(csv.lines().any(|l| l == "weak,1 1 1 1,6,4,2,4/1,5/1"), "{csv}");
}

#[test]
fn ratios_and_edecay() {
    let v = json(&["ratios", "x*y", "--primes", "3,5", "--powers", "1..3", "--json"]);
    assert!(v["banner"].is_null());
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
    assert!((v["estimated_c"].as_f64().unwrap() - 1.0).abs() < 1e-9);

    let out = newtonsum(&["ratios", "x^2 + y^3", "-p", "5", "-m", "1", "--csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("p,m,abs_s"));
    let out = newtonsum(&["ratios", "x^2 + y^3", "-p", "5", "-m", "1"]);
    assert!(stdout(&out).contains("hypothesis unmet"));

    let v = json(&["edecay", "x*y + z*u", "--primes", "3,5,7,11,13", "--json"]);
    assert_eq!(v["sigma_tau"], "2/1");
    assert_eq!(v["dim_exponent"], "-1/1");
    assert!(v["fitted_exponent"].as_f64().unwrap() < -1.0);
}

#[test]
fn sigma_bound_finding_keeps_exit_zero() {
    let v = json(&["sigma-bound", "x*y + z*u", "--d", "0", "--json"]);
    assert_eq!(v["holds"], true);
    let out = newtonsum(&["sigma-bound", "x*y", "--d", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("finding"));
    assert_eq!(newtonsum(&["sigma-bound", "x^2 + y^3", "--d", "0"]).status.code(), Some(2));
}

#[test]
fn usage_and_budget_errors_exit_two() {
    for args in [
        vec!["sum", "x*y", "-m", "1"],
        vec!["sum", "x*y", "-p", "3"],
        vec!["analyze", "x*y + 1"],
        vec!["analyze", "x +* y"],
        vec!["analyze", "x*y", "--csv"],
        vec!["verify-formula", "x*y", "-p", "4", "-m", "1"],
        vec!["verify-formula", "x*y", "-p", "3", "--powers", "3..1"],
        vec!["verify-formula", "x*y", "-p", "3", "-m", "1", "--eps", "0"],
        vec!["esum", "x*y", "-p", "3", "--face", "99"],
        vec!["frobnicate"],
    ] {
        let out = newtonsum(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
    let out = newtonsum(&["sum", "x*y", "-p", "3", "-m", "5", "--budget", "100"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("budget"));
}

#[test]
fn budget_error_rows_do_not_stop_the_scan() {
    let v = newtonsum(&["verify-formula", "x*y", "-p", "3", "--powers", "1..4", "--budget", "1000", "--json"]);
    assert_eq!(v.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&v.stdout).unwrap();
    let verdicts: Vec<&str> = v["rows"].as_array().unwrap().iter().map(|r| r["verdict"].as_str().unwrap()).collect();
    assert_eq!(&verdicts[..3], &["pass", "pass", "pass"]);
    assert!(verdicts[3].starts_with("error"));
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("newtonsum-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = newtonsum(&["analyze", "x^2 + y^3", "--json", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["sigma"], "5/6");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn json_is_deterministic() {
    let args = ["verify-formula", "x*y + z*u", "--primes", "3,5", "--powers", "1..2", "--workers", "3", "--json"];
    assert_eq!(newtonsum(&args).stdout, newtonsum(&args).stdout);
    let args = ["verify-nu", "x^2 + y^3", "--T", "10", "--seed", "9", "--json"];
    assert_eq!(newtonsum(&args).stdout, newtonsum(&args).stdout);
}

#[test]
fn golden_reports() {
    check_golden("analyze_xy.json", &["analyze", "x*y", "--json"]);
    check_golden("nondeg_cusp_p3.json", &["nondeg", "x^2 + y^3", "-p", "3", "--workers", "1", "--json"]);
    check_golden(
        "verify_formula_xy_p3.json",
        &["verify-formula", "x*y", "-p", "3", "--powers", "1..2", "--workers", "1", "--json"],
    );
    check_golden("verify_nu_cusp.json", &["verify-nu", "x^2 + y^3", "--T", "4", "--samples", "20", "--json"]);
    check_golden("sigma_bound_xy.json", &["sigma-bound", "x*y", "--d", "1", "--json"]);
}
