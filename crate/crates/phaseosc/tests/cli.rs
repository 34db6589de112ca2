//! End-to-end tests of the binary: exit codes, file outputs, and the
//! summary schema.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_phaseosc"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("phaseosc-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn fast_analyze(model: &Path, out: &Path) -> Output {
    run(&[
        "analyze",
        "--model",
        &model.display().to_string(),
        "--out",
        &out.display().to_string(),
        "--n",
        "1024",
        "--mc-paths",
        "4",
        "--mc-horizon",
        "20",
    ])
}

#[test]
fn analyze_standard_model() {
    let dir = tmp("analyze");
    let model = dir.join("m.json");
    write(
        &model,
        r#"{"rho": 1.0, "sigma": 1.0, "f": {"a0": 2.0, "a": [0.0], "b": [1.0]}}"#,
    );
    let out = dir.join("out");
    let res = fast_analyze(&model, &out);
    assert_eq!(res.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&res.stderr));

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["generic"], serde_json::Value::Bool(true));
    assert_eq!(summary["case"], "non_vanishing");
    assert!(summary["lambda_quadrature"]["value"].as_f64().unwrap() < 0.0);
    assert!(summary["lambda_flux"]["value"].as_f64().is_some());
    assert!(summary["lambda_mc"]["value"].as_f64().is_some());
    assert!(summary["intervals"].as_array().unwrap().len() == 1);

    let csv = std::fs::read_to_string(out.join("density.csv")).unwrap();
    assert!(csv.starts_with("phi,p_st\n"));
    assert_eq!(csv.lines().count(), 1025);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn analyze_constant_coupling_not_generic() {
    let dir = tmp("analyze-const");
    let model = dir.join("m.json");
    write(&model, r#"{"rho": 1.0, "f": {"a0": 1.0, "a": [], "b": []}}"#);
    let out = dir.join("out");
    let res = fast_analyze(&model, &out);
    assert_eq!(res.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("warning"), "stderr: {stderr}");

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["generic"], serde_json::Value::Bool(false));
    assert_eq!(summary["h1"], serde_json::Value::Bool(false));
    assert_eq!(summary["lambda_quadrature"]["value"].as_f64().unwrap(), 0.0);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn analyze_non_generic_tangential_zero() {
    // 1 - cos phi: H2 fails; the pipeline completes with warnings, no
    // density, and a Monte Carlo estimate.
    let dir = tmp("analyze-tangent");
    let model = dir.join("m.json");
    write(&model, r#"{"rho": 1.0, "f": {"a0": 1.0, "a": [-1.0], "b": [0.0]}}"#);
    let out = dir.join("out");
    let res = fast_analyze(&model, &out);
    assert_eq!(res.status.code(), Some(0));

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["h2"], serde_json::Value::Bool(false));
    assert!(summary["lambda_quadrature"].is_null());
    assert!(!summary["lambda_quadrature_reason"].is_null());
    assert!(summary["density_reason"].as_str().is_some());
    assert!(summary["lambda_mc"]["value"].as_f64().is_some());
    assert!(!out.join("density.csv").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn malformed_json_exits_1_with_location() {
    let dir = tmp("badjson");
    let model = dir.join("m.json");
    write(&model, "{\"rho\": 1.0,\n  nope");
    let res = fast_analyze(&model, &dir.join("out"));
    assert_eq!(res.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn invalid_rho_exits_1() {
    let dir = tmp("badrho");
    let model = dir.join("m.json");
    write(&model, r#"{"rho": -1.0, "f": {"a0": 2.0, "a": [], "b": [1.0]}}"#);
    let res = fast_analyze(&model, &dir.join("out"));
    assert_eq!(res.status.code(), Some(1));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_flag_exits_1() {
    let res = run(&["analyze", "--frobnicate"]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn simulate_writes_trajectory_and_pullback() {
    let dir = tmp("simulate");
    let model = dir.join("m.json");
    write(
        &model,
        r#"{"rho": 1.0, "sigma": 1.0, "f": {"a0": 2.0, "a": [0.0], "b": [1.0]}}"#,
    );
    let out = dir.join("out");
    let res = run(&[
        "simulate",
        "--model",
        &model.display().to_string(),
        "--out",
        &out.display().to_string(),
        "--members",
        "4",
        "--horizon",
        "10",
        "--stride",
        "1000",
        "--depths",
        "2,5",
    ]);
    assert_eq!(res.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(
        header,
        "t,phase_0,phase_1,phase_2,phase_3,max_pairwise_dist,order_parameter"
    );
    let pb: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("pullback.json")).unwrap()).unwrap();
    assert_eq!(pb["depths"].as_array().unwrap().len(), 2);
    assert_eq!(pb["noise"], "common");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn sweep_covers_zero_sigma() {
    let dir = tmp("sweep");
    let model = dir.join("m.json");
    write(&model, r#"{"rho": 1.0, "f": {"a0": 0.0, "a": [], "b": [1.0]}}"#);
    let out = dir.join("out");
    let res = run(&[
        "sweep",
        "--model",
        &model.display().to_string(),
        "--out",
        &out.display().to_string(),
        "--sigmas",
        "0,0.5,1,2",
        "--n",
        "1024",
        "--mc-paths",
        "4",
        "--mc-horizon",
        "20",
    ]);
    assert_eq!(res.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "sigma,lambda_quadrature,lambda_mc,lambda_mc_stderr,C,generic"
    );
    let zero_row = lines.next().unwrap();
    assert!(zero_row.starts_with("0,0,"), "row: {zero_row}");
    assert!(zero_row.ends_with("false"), "row: {zero_row}");
    // Every nonzero sigma is generic with a negative exponent, well beyond
    // the small-noise regime.
    for row in lines {
        assert!(row.ends_with("true"), "row: {row}");
        let lambda: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!(lambda < 0.0, "row: {row}");
    }
    std::fs::remove_dir_all(&dir).ok();
}
