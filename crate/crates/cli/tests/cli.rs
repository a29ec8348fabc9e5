use std::process::{Command, Output};

use biscat_core::{io, PlaneGrid, TestFunction};
use serde_json::Value;

fn biscat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biscat")).args(args).env("BISCAT_THREADS", "1").output().expect("spawn biscat")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json stdout")
}

#[test]
fn kernel_eval_reports_both_values() {
    let v = json(&biscat(&["kernel", "eval", "--z", "1.5,0.5", "--r", "0.7", "--path", "integral"]));
    assert_eq!(v["path"], "integral");
    let s = json(&biscat(&["kernel", "eval", "--z", "1.5,0.5", "--r", "0.7"]));
    for i in 0..2 {
        let a = v["h01"][i].as_f64().unwrap();
        let b = s["h01"][i].as_f64().unwrap();
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
    assert!(s["resolvent"][0].is_f64());
}

#[test]
fn classify_weak_well() {
    let v = json(&biscat(&["classify", "--potential", "well:beta=1,r0=1"]));
    assert_eq!(v["verdict"], "regular");
}

#[test]
fn lp_scan_identity_csv() {
    let out = biscat(&["--csv", "lp-scan", "--op", "identity", "--p", "2,4", "--res", "32,64"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "p,n32,n64,spread,stable");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].ends_with("true"));
}

#[test]
fn unknown_operator_fails() {
    let out = biscat(&["lp-scan", "--op", "nonsense", "--res", "16"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nonsense"));
}

#[test]
fn waveop_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("u.bsf");
    let output = dir.path().join("w.bsf");
    let cfg = dir.path().join("cfg.json");
    let metrics = dir.path().join("m.json");
    let g = PlaneGrid::new(32, 8.0).unwrap();
    let u = TestFunction::annular_gaussian(g, 1.5, 0.15, 0, (0.0, 0.0)).unwrap();
    io::write_field(&input, &u.field).unwrap();
    std::fs::write(&cfg, r#"{"quadrature": {"wave_nodes": 16, "circle_nodes": 64}}"#).unwrap();
    let args = [
        "--config",
        cfg.to_str().unwrap(),
        "waveop",
        "--potential",
        "well:beta=0.1,r0=1",
        "--in",
        input.to_str().unwrap(),
        "--out",
        output.to_str().unwrap(),
        "--annulus",
        "0.45,2.55",
        "--metrics",
        metrics.to_str().unwrap(),
    ];
    let v = json(&biscat(&args));
    assert!(v["annulus"][0].as_f64().unwrap() > 0.4);
    let w = io::read_field(&output).unwrap();
    assert_eq!(w.grid.n(), 32);
    let ratio = w.l2_norm() / u.field.l2_norm();
    assert!((ratio - 1.0).abs() < 0.05, "norm ratio {ratio}");
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&metrics).unwrap()).unwrap();
    assert_eq!(saved, v);
}

#[test]
fn appendix_suite_passes() {
    let out = biscat(&["verify", "--suite", "appendix"]);
    let v = json(&out);
    assert!(v.as_array().unwrap().iter().all(|c| c["pass"] == true));
}
