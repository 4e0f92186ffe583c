use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn run(args: &[&str], config: &Value) -> (Output, TempDir) {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("config.json");
    fs::write(&cfg, config.to_string()).unwrap();
    let out = dir.path().join("out");
    let output = Command::new(env!("CARGO_BIN_EXE_degeo"))
        .args(args)
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .arg("--quiet")
        .output()
        .unwrap();
    (output, dir)
}

fn out_file(dir: &TempDir, name: &str) -> std::path::PathBuf {
    dir.path().join("out").join(name)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn homogeneous_solve(a: f64) -> Value {
    json!({
        "potential": {"kind": "homogeneous", "params": {"lambda1": 1.0, "lambda2": 2.0}},
        "p_minus": [1.0, 0.0],
        "p_plus": [0.0, 0.0],
        "A": a
    })
}

fn two_well(a: f64) -> Value {
    json!({
        "potential": {"kind": "two_well_k", "params": {"k": 4.0}},
        "p_minus": [-1.0, 0.0],
        "p_plus": [1.0, 0.0],
        "A": a
    })
}

#[test]
fn solve_small_area_succeeds() {
    let (o, dir) = run(&["solve"], &homogeneous_solve(0.05));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out_file(&dir, "result.json"));
    assert_eq!(r["converged"], json!(true));
    assert_eq!(r["nonexistence_suspected"], json!(false));
    assert!((r["area_achieved"].as_f64().unwrap() - 0.05).abs() < 1e-6);
    let curve = fs::read_to_string(out_file(&dir, "curve.csv")).unwrap();
    assert!(curve.starts_with("p1,p2\n"));
    assert!(curve.lines().count() > 10);
}

#[test]
fn solve_is_byte_deterministic() {
    let (_, a) = run(&["solve"], &homogeneous_solve(0.1));
    let (_, b) = run(&["solve"], &homogeneous_solve(0.1));
    for f in ["result.json", "curve.csv"] {
        assert_eq!(fs::read(out_file(&a, f)).unwrap(), fs::read(out_file(&b, f)).unwrap(), "{f}");
    }
}

#[test]
fn solve_in_nonexistence_regime_exits_2() {
    let (o, dir) = run(&["solve"], &two_well(5.0));
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out_file(&dir, "result.json"));
    assert_eq!(r["nonexistence_suspected"], json!(true));
}

#[test]
fn wave_on_flagged_solve_writes_no_profile() {
    let (o, dir) = run(&["wave"], &two_well(5.0));
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out_file(&dir, "profile.csv").exists());
}

#[test]
fn malformed_config_exits_1() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, "{\"potential\": ").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_degeo")).arg("solve").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());

    let (o, _) = run(&["solve"], &json!({"potential": {"kind": "homogeneous", "params": {"lambda1": 1.0}}}));
    assert_eq!(o.status.code(), Some(1));
    let (o, _) = run(&["solve"], &json!({"nonsense": 1}));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_config_exits_1() {
    let o = Command::new(env!("CARGO_BIN_EXE_degeo")).args(["solve", "/nonexistent/config.json"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn homogeneous_kind_mismatch_exits_1() {
    let cfg = json!({
        "potential": {"kind": "two_well_k", "params": {"k": 4.0}},
        "p0": [1.0, 0.0],
        "mode": "ellipse"
    });
    let (o, _) = run(&["homogeneous"], &cfg);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn homogeneous_ellipse_energy() {
    let cfg = json!({
        "potential": {"kind": "homogeneous", "params": {"lambda1": 1.0, "lambda2": 1.0}},
        "p0": [1.0, 0.0],
        "mode": "ellipse"
    });
    let (o, dir) = run(&["homogeneous"], &cfg);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out_file(&dir, "result.json"));
    let e = r["energy"].as_f64().unwrap();
    assert!((e - std::f64::consts::TAU).abs() <= 1e-3, "{e}");
}

#[test]
fn homogeneous_area_table() {
    let cfg = json!({
        "potential": {"kind": "homogeneous", "params": {"lambda1": 1.0, "lambda2": 2.0}},
        "p0": [1.0, 0.0],
        "A_list": [-0.1, 0.0, 0.1]
    });
    let (o, dir) = run(&["homogeneous"], &cfg);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out_file(&dir, "table.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("A,beta,energy,dL_dA"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn radial_bundle_above_threshold() {
    let cfg = json!({
        "potential": {"kind": "radial_quartic", "params": {"b": 1.0, "center": [0.0, 0.0]}},
        "R0": 1.0,
        "A_tilde": 0.75,
        "b_negative": {"b": -0.5, "alpha_gap": 0.1}
    });
    let (o, dir) = run(&["radial"], &cfg);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let f = read_json(&out_file(&dir, "figure1.json"));
    assert!((f["vertical_extent"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
    let neg = &f["b_negative"];
    assert!(neg["parabola_cost"].as_f64().unwrap() < neg["vertical_cost"].as_f64().unwrap());
    assert!(out_file(&dir, "path.csv").exists());
}

#[test]
fn radial_kind_mismatch_exits_1() {
    let cfg = json!({
        "potential": {"kind": "homogeneous", "params": {"lambda1": 1.0, "lambda2": 1.0}},
        "R0": 1.0,
        "A_tilde": 0.2
    });
    let (o, _) = run(&["radial"], &cfg);
    assert_eq!(o.status.code(), Some(1));
}

fn sweep_config(areas: Value) -> Value {
    json!({
        "potential": {"kind": "homogeneous", "params": {"lambda1": 1.0, "lambda2": 2.0}},
        "p_minus": [1.0, 0.0],
        "p_plus": [0.0, 0.0],
        "A_list": areas
    })
}

fn table(dir: &TempDir) -> Vec<Vec<String>> {
    let text = fs::read_to_string(out_file(dir, "table.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("A,energy,multiplier,slope_fd,converged,flagged"));
    lines.map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn single_point_sweep_has_empty_slope() {
    let (o, dir) = run(&["sweep"], &sweep_config(json!([0.05])));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = table(&dir);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][3], "");
}

#[test]
fn descending_sweep_is_sorted() {
    let (o, dir) = run(&["sweep"], &sweep_config(json!([0.02, 0.01, 0.0, -0.01])));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = table(&dir);
    let a: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(a, vec![-0.01, 0.0, 0.01, 0.02]);
    for r in &rows[1..3] {
        let (lam, slope): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
        assert!((lam - slope).abs() <= 1e-2 * (1.0 + lam.abs()), "{r:?}");
    }
    assert!(rows[0][3].is_empty() && rows[3][3].is_empty());
}

#[test]
fn sweep_range_and_jobs() {
    let mut cfg = sweep_config(json!(null));
    cfg.as_object_mut().unwrap().remove("A_list");
    cfg["A_range"] = json!({"start": -0.04, "stop": 0.04, "n": 3});
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("c.json");
    fs::write(&path, cfg.to_string()).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_degeo"))
        .args(["--jobs", "1", "--quiet", "--out"])
        .arg(dir.path().join("out"))
        .arg("sweep")
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(table(&dir).len(), 3);
}

#[test]
fn wave_writes_profile_and_spectrum() {
    let cfg = json!({
        "potential": {"kind": "custom", "params": {
            "terms": [[0.25, 4, 0], [-0.5, 2, 0], [0.25, 0, 0], [0.5, 0, 2]],
            "wells": [[-1.0, 0.0], [1.0, 0.0]]
        }},
        "p_minus": [-1.0, 0.0],
        "p_plus": [1.0, 0.0],
        "A": 0.0,
        "k": 4
    });
    let (o, dir) = run(&["wave"], &cfg);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let profile = fs::read_to_string(out_file(&dir, "profile.csv")).unwrap();
    assert!(profile.starts_with("y,u1,u2\n"));
    let spec = read_json(&out_file(&dir, "spectrum.json"));
    assert_eq!(spec["eigenvalues"].as_array().unwrap().len(), 4);
    assert!(spec["zero_mode_alignment"].as_f64().unwrap() >= 0.99);
}
