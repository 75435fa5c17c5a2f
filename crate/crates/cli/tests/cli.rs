use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

fn systems() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../systems")
}

fn config(name: &str) -> String {
    systems().join(format!("{name}.json")).display().to_string()
}

fn liectrl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liectrl")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn analyze_reports_decomposition_dims() {
    let v = json(&liectrl(&["analyze", "--config", &config("heisenberg_hyperbolic")]));
    assert_eq!(v["decomposition"]["dims"], serde_json::json!([1, 1, 1]));
    assert_eq!(v["decomposition"]["hyperbolic"], false);
    assert_eq!(v["identities"]["plus_zero_with_minus"], true);
}

#[test]
fn analyze_scalar_unstable_has_open_control_set() {
    let v = json(&liectrl(&["analyze", "--config", &config("scalar_unstable")]));
    assert_eq!(v["classification"]["c_open"]["value"], "yes");
    assert_eq!(v["classification"]["c_bounded"]["value"], "unknown");
    let v = json(&liectrl(&["analyze", "--evidence", "--config", &config("scalar_unstable")]));
    assert_eq!(v["classification"]["c_bounded"]["value"], "yes");
}

#[test]
fn malformed_json_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"algebra\": ").unwrap();
    let o = liectrl(&["analyze", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn non_derivation_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sys.json");
    std::fs::write(
        &path,
        r#"{"algebra": {"dim": 3, "brackets": [{"i": 1, "j": 2, "result": [0, 0, 1]}]},
            "derivation": [[1, 0, 0], [0, 0, 0], [0, 0, 0]],
            "controls": [[1, 0, 0]], "omega": {"box": [1]}}"#,
    )
    .unwrap();
    let o = liectrl(&["analyze", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

fn script(dir: &Path, text: &str) -> String {
    let path = dir.join("controls.json");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn simulate_scalar_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let s = script(dir.path(), r#"[{"duration": 1.0, "u": [1.0]}]"#);
    let v = json(&liectrl(&["simulate", "--config", &config("scalar_unstable"), "--controls", &s]));
    let end = v["final"][0].as_f64().unwrap();
    assert!((end - (std::f64::consts::E - 1.0)).abs() < 1e-8, "{end}");

    let s = script(dir.path(), r#"[{"duration": 1.0, "u": [0.0]}]"#);
    let o = liectrl(&["simulate", "--config", &config("scalar_unstable"), "--controls", &s, "--format", "csv"]);
    let text = stdout(&o);
    assert!(text.starts_with("t,x1\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",0")));
}

#[test]
fn simulate_heisenberg_from_offset_start() {
    let dir = tempfile::tempdir().unwrap();
    let s = script(dir.path(), r#"[{"duration": 0.5, "u": [1.0, 0.0]}, {"duration": 0.5, "u": [0.0, 1.0]}]"#);
    let v = json(&liectrl(&[
        "simulate", "--config", &config("heisenberg_zero_spectrum"), "--controls", &s, "--x0", "0,0,-0.25",
    ]));
    // exp(0.5 e2) exp(0.5 e1) exp(-0.25 e3) = exp(0.5 e1 + 0.5 e2 - 0.125 e3 - 0.25 e3).
    let end: Vec<f64> = v["final"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((end[0] - 0.5).abs() < 1e-9 && (end[1] - 0.5).abs() < 1e-9);
    assert!((end[2] + 0.375).abs() < 1e-9, "{end:?}");
}

#[test]
fn simulate_divergence_exits_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sys.json");
    std::fs::write(
        &cfg,
        r#"{"algebra": {"dim": 1}, "derivation": [[1]], "controls": [[1]], "omega": {"box": [1]},
            "simulation": {"safety_radius": 10}}"#,
    )
    .unwrap();
    let s = script(dir.path(), r#"[{"duration": 5.0, "u": [1.0]}]"#);
    let o = liectrl(&["simulate", "--config", cfg.to_str().unwrap(), "--controls", &s]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn simulate_rejects_controls_outside_range() {
    let dir = tempfile::tempdir().unwrap();
    let s = script(dir.path(), r#"[{"duration": 1.0, "u": [2.0]}]"#);
    let o = liectrl(&["simulate", "--config", &config("scalar_stable"), "--controls", &s]);
    assert_eq!(o.status.code(), Some(2));
}

fn agree_line(v: &serde_json::Value, property: &str) -> bool {
    v["cross_check"]["lines"]
        .as_array()
        .unwrap()
        .iter()
        .find(|l| l["property"] == property)
        .map(|l| l["agree"] == true)
        .unwrap()
}

#[test]
fn controlset_cross_checks_agree() {
    let v = json(&liectrl(&["controlset", "--config", &config("scalar_unstable")]));
    assert!(agree_line(&v, "open"));
    assert_eq!(v["agree"], true);
    let v = json(&liectrl(&["controlset", "--config", &config("scalar_stable")]));
    assert!(agree_line(&v, "closed"));
    assert_eq!(v["flags"]["bounded_in_box"], true);
    let v = json(&liectrl(&["controlset", "--config", &config("heisenberg_zero_spectrum")]));
    assert!(agree_line(&v, "C=G"));
    assert!(v["control_set"]["coverage"].as_f64().unwrap() >= 0.99);
}

#[test]
fn text_output_has_agree_lines() {
    let dir = tempfile::tempdir().unwrap();
    let o = liectrl(&["controlset", "--config", &config("scalar_unstable"), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("AGREE(open)"));
    assert!(!stdout(&o).contains("DISAGREE"));
}

#[test]
fn grid_outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = liectrl(&[
            "reach", "--config", &config("planar_hyperbolic"), "--horizon", "3", "--threads", "3", "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    for file in ["reach.csv", "controllable.csv", "reach.json"] {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        assert_eq!(x, y, "{file} differs");
    }
}

#[test]
fn reach_csv_to_stdout() {
    let o = liectrl(&["reach", "--config", &config("scalar_stable"), "--format", "csv", "--cells", "61"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("axis_bounds,cells,kind,horizon"));
    assert_eq!(lines.next(), Some("-3:3,61,reachable,8"));
    assert_eq!(lines.next(), Some("i1"));
    assert!(lines.count() > 5);
}

#[test]
fn overrides_are_validated() {
    let o = liectrl(&["reach", "--config", &config("scalar_stable"), "--dwell", "0.015"]);
    assert_eq!(o.status.code(), Some(2));
    let o = liectrl(&["reach", "--config", &config("scalar_stable"), "--cells", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn every_shipped_system_runs_within_a_minute() {
    for name in [
        "scalar_unstable",
        "scalar_stable",
        "planar_hyperbolic",
        "heisenberg_zero_spectrum",
        "heisenberg_hyperbolic",
    ] {
        let dir = tempfile::tempdir().unwrap();
        let start = Instant::now();
        let o = liectrl(&["controlset", "--config", &config(name), "--checks", "--out", dir.path().to_str().unwrap()]);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(start.elapsed() < Duration::from_secs(60), "{name} took {:?}", start.elapsed());
        let o = liectrl(&["analyze", "--config", &config(name)]);
        assert!(o.status.success(), "{name}");
    }
}
