use std::path::Path;
use std::process::{Command, Output};

fn grushin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grushin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn eval_jacobi_example() {
    let o = grushin(&["eval", "jacobi", "--j", "2", "--alpha", "0", "--beta", "0", "--x", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), -0.5);
}

#[test]
fn eval_profile_example() {
    let o = grushin(&["eval", "profile", "--d", "2", "--ell2", "1", "--m2", "0", "--psi", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
}

#[test]
fn eval_zonal_diagonal() {
    // Degree one on S^2: 3 / (4π).
    let o = grushin(&["eval", "zonal", "--k", "2", "--m2", "3", "--u", "1"]);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 3.0 / (4.0 * std::f64::consts::PI)).abs() < 1e-14);
}

#[test]
fn missing_flag_is_a_usage_error() {
    let o = grushin(&["eval", "jacobi", "--j", "2", "--alpha", "0", "--beta", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn domain_error_names_the_precondition() {
    let o = grushin(&["eval", "profile", "--d", "2", "--ell2", "2", "--m2", "0", "--psi", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not in N_2"), "{}", stderr(&o));
    let o = grushin(&["eval", "jacobi", "--j", "1", "--alpha", "-2", "--beta", "0", "--x", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = grushin(&["scan", "elliptic", "--d", "7", "--k", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("k < d <= 6"));
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn elliptic_scan_is_reproducible_and_hashed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = ["scan", "elliptic", "--d", "2", "--k", "1", "--i", "16:48", "--out", out];
    let o = grushin(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let first = read(dir.path(), "scan_elliptic.csv");
    let lines: Vec<&str> = first.lines().collect();
    assert!(lines[1].starts_with("# config_sha256 = "));
    assert_eq!(lines[1].len(), "# config_sha256 = ".len() + 64);
    assert!(lines.contains(&"d,k,alpha,i,x_norm,sum,predicted,ratio"));
    assert!(stdout(&o).contains("slope_at_zero"));
    grushin(&args);
    assert_eq!(first, read(dir.path(), "scan_elliptic.csv"));
    let manifest: serde_json::Value = serde_json::from_str(&read(dir.path(), "scan_elliptic.manifest.json")).unwrap();
    assert_eq!(manifest["passed"], true);
    for key in ["config", "seeds", "tolerances", "fitted_constants"] {
        assert!(manifest.get(key).is_some(), "{key}");
    }
}

#[test]
fn failed_scan_checks_exit_three() {
    // The combined sum grows like i^{d+k-1} at x = 0, so the d-1 slope check fails.
    let dir = tempfile::tempdir().unwrap();
    let o = grushin(&["scan", "cluster", "--d", "2", "--k", "1", "--alpha", "0", "--i", "16:48", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let manifest: serde_json::Value = serde_json::from_str(&read(dir.path(), "scan_cluster.manifest.json")).unwrap();
    assert_eq!(manifest["passed"], false);
    assert_eq!(manifest["checks"][0]["passed"], false);
}

#[test]
fn config_file_and_json_format() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("out");
    std::fs::write(
        &cfg,
        format!(r#"{{"d": 3, "k": 2, "format": "json", "output_dir": {:?}}}"#, out.to_str().unwrap()),
    )
    .unwrap();
    let o = grushin(&["--config", cfg.to_str().unwrap(), "scan", "volume", "--psi", "0.3"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let table: serde_json::Value = serde_json::from_str(&read(&out, "scan_volume.json")).unwrap();
    assert_eq!(table["meta"]["d"], "3");
    assert_eq!(table["rows"].as_array().unwrap().len(), 7);
}

#[test]
fn verify_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = grushin(&["verify", "--only", "3,13", "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().count(), 2);
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["passed"], true);
    assert_eq!(r["criteria"].as_array().unwrap().len(), 2);
}

#[test]
fn calibrate_writes_every_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cal.json");
    let o = grushin(&["calibrate", "--ell-max", "12", "--points", "101", "--dims", "2:3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["2"]["prefactor"].as_f64().unwrap() > 0.0);
    assert!(v["3"]["c_exp"].as_f64().unwrap() > 0.0);
}
