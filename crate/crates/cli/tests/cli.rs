//! End-to-end checks of the command-line interface: exit codes, document
//! round trips, determinism, sweeps, and CSV exports.

use std::io::Write;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_marginforge"))
}

fn plant_file(content: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(content.as_bytes()).unwrap();
    f
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON document")
}

#[test]
fn bound_document_and_determinism() {
    let f = plant_file(r#"{"num": [-2.0, 1.0], "den": [-0.5, 1.0]}"#);
    let run = || bin().arg("bound").arg(f.path()).output().unwrap();
    let a = run();
    assert!(a.status.success());
    let doc = stdout_json(&a);
    let bound = doc["bound"].as_f64().unwrap();
    assert!(bound > 1.0 && bound <= 3.0 + 1e-3, "bound {bound}");
    assert!(doc["trace"].as_array().unwrap().len() > 3);
    let b = run();
    assert_eq!(a.stdout, b.stdout, "identical inputs must give identical documents");
}

#[test]
fn shift_flag_tightens_bound() {
    let f = plant_file(r#"{"num": [-2.0, 1.0], "den": [-0.5, 1.0]}"#);
    let base = stdout_json(&bin().arg("bound").arg(f.path()).output().unwrap());
    let shifted = stdout_json(
        &bin().args(["bound"]).arg(f.path()).args(["--shift", "-10"]).output().unwrap(),
    );
    assert!(shifted["bound"].as_f64().unwrap() > base["bound"].as_f64().unwrap());
}

#[test]
fn exit_codes() {
    // parse failure
    let bad = plant_file("{not json");
    let out = bin().arg("bound").arg(bad.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // stable plant
    let stable = plant_file(r#"{"num": [1.0], "den": [1.0, 1.0]}"#);
    let out = bin().arg("bound").arg(stable.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    // shift with limit >= 1/2 at infinity
    let f = plant_file(r#"{"num": [-2.0, 1.0], "den": [-0.5, 1.0]}"#);
    let out = bin().arg("bound").arg(f.path()).args(["--shift", "0.6"]).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn homotopy_gamma_validated() {
    let f = plant_file(r#"{"num": [-2.0, 1.0], "den": [-3.0, 1.0]}"#);
    let out = bin()
        .arg("homotopy")
        .arg(f.path())
        .args(["--steps", "1", "--gamma", "1.2"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("0, 1"));
}

#[test]
fn sweep_fans_out() {
    let f = plant_file(r#"{"num": [-2.0, 1.0], "den": [-0.5, 1.0]}"#);
    let out = bin()
        .arg("bound")
        .arg(f.path())
        .args(["--sweep", "shift=-10:0:5"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc = stdout_json(&out);
    let entries = doc["sweep"].as_array().unwrap();
    assert_eq!(entries.len(), 3);
    // more negative shifts certify at least as much delay
    let bounds: Vec<f64> = entries.iter().map(|e| e["bound"].as_f64().unwrap()).collect();
    assert!(bounds[0] >= bounds[1] && bounds[1] >= bounds[2]);
}

#[test]
fn builtin_case_addressable() {
    let out = bin().args(["bound", "ex1", "--shift", "-50"]).output().unwrap();
    assert!(out.status.success());
    let doc = stdout_json(&out);
    let bound = doc["bound"].as_f64().unwrap();
    assert!(bound >= 16.47 && bound <= 18.301 + 1e-3, "bound {bound}");
}

#[test]
fn plotdata_weight_sandwich() {
    let f = plant_file(r#"{"num": [-2.0, 1.0], "den": [-0.5, 1.0]}"#);
    let out = bin()
        .arg("plotdata")
        .arg(f.path())
        .args(["--what", "weight", "--points", "50", "--tau", "1.0"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let (phi, mag) = (cols[1], cols[2]);
        assert!(mag >= phi * (1.0 - 1e-6), "sandwich violated: {phi} > {mag}");
        rows += 1;
    }
    assert_eq!(rows, 50);
}

#[test]
fn plotdata_nyquist() {
    let out = bin()
        .args(["plotdata", "ex1", "--what", "nyquist", "--points", "20"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().count(), 21);
    assert!(text.lines().next().unwrap().contains("omega"));
}
