use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bngkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bngkit")).args(args).env_remove("BNGKIT_TOL").output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

const ANTIPODAL: &str = r#"{"clusters":[0, 3.141592653589793]}"#;
const QUARTER: &str = r#"{"clusters":[1.5707963267948966, -1.5707963267948966]}"#;

#[test]
fn length_of_antipodal_pair() {
    let out = bngkit(&["length", "--input", r#"{"phases":[0, 3.14159265]}"#]);
    assert_eq!(code(&out), 0);
    let ell = json_of(&out)["ell"].as_f64().unwrap();
    assert!((ell - std::f64::consts::SQRT_2).abs() < 1e-5);

    let out = bngkit(&["length", "--input", ANTIPODAL]);
    let v = json_of(&out);
    assert!((v["ell_ess"].as_f64().unwrap() - std::f64::consts::SQRT_2).abs() < 1e-12);
}

#[test]
fn length_reads_standard_input() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_bngkit"))
        .arg("length")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(br#"{"phases":[0.5]}"#).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(json_of(&out)["ell"].as_f64().unwrap(), 0.0);
}

fn certify_to(dir: &Path) -> std::path::PathBuf {
    let (u, v, cert) = (dir.join("u.json"), dir.join("v.json"), dir.join("cert.json"));
    std::fs::write(&u, ANTIPODAL).unwrap();
    std::fs::write(&v, QUARTER).unwrap();
    let out = bngkit(&[
        "certify",
        "--mode",
        "calkin",
        "--u",
        u.to_str().unwrap(),
        "--v",
        v.to_str().unwrap(),
        "--out",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    cert
}

#[test]
fn certify_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cert = certify_to(dir.path());
    let out = bngkit(&["verify", "--cert", cert.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let report = json_of(&out);
    assert_eq!(report["pass"], Value::Bool(true));
    for key in ["product_residual", "worst_factor", "count_ok"] {
        assert!(report.get(key).is_some(), "{key}");
    }
}

#[test]
fn tampered_certificate_exits_2_and_names_the_factor() {
    let dir = tempfile::tempdir().unwrap();
    let cert = certify_to(dir.path());
    let mut value: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    let entry = &mut value["factors"][0]["conjugator"]["re"][0][0];
    *entry = Value::from(entry.as_f64().unwrap() + 0.01);
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, value.to_string()).unwrap();

    let out = bngkit(&["verify", "--cert", tampered.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let report = json_of(&out);
    assert_eq!(report["pass"], Value::Bool(false));
    assert_eq!(report["failures"][0]["class"], "factor");
    assert_eq!(report["failures"][0]["index"], 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("factor 0"));
}

#[test]
fn emitted_certificate_reparses_to_the_same_value() {
    let u = r#"{"clusters":[0.3, 2.0, -1.0]}"#;
    let v = r#"{"clusters":[1.0, -2.5]}"#;
    let out = bngkit(&["certify", "--mode", "calkin", "--u", u, "--v", v]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let cert: bngkit::certify::Certificate = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string(&cert).unwrap(), text.trim_end());
}

#[test]
fn matrix_mode_chooses_m() {
    let u = r#"{"phases":[0.6, 0.6, -0.6, -0.6, 0.6, 0.6, -0.6, -0.6]}"#;
    let out = bngkit(&["certify", "--mode", "matrix", "--u", u, "--v", QUARTER]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let cert = json_of(&out);
    assert_eq!(cert["meta"]["m"], 1);
    assert!(cert["factors"].as_array().unwrap().len() <= 32);
}

#[test]
fn exit_codes() {
    // precondition: the length gate
    let narrow = r#"{"clusters":[0, 0.1]}"#;
    let u = r#"{"phases":[0, 3.0]}"#;
    assert_eq!(code(&bngkit(&["certify", "--mode", "matrix", "--u", u, "--v", narrow, "--m", "1"])), 1);
    // precondition: odd chain
    assert_eq!(code(&bngkit(&["su2", "--theta", "0.5", "--phi", "0.1", "--m", "3"])), 1);
    // malformed JSON names the field
    let out = bngkit(&["length", "--input", r#"{"phases":[0, "x"]}"#]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("phases"));
    // missing file and unknown subcommand
    assert_eq!(code(&bngkit(&["verify", "--cert", "/no/such/cert.json"])), 3);
    assert_eq!(code(&bngkit(&["frobnicate"])), 3);
    assert_eq!(code(&bngkit(&["--help"])), 0);
}

#[test]
fn tolerance_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cert = certify_to(dir.path());
    let out = Command::new(env!("CARGO_BIN_EXE_bngkit"))
        .args(["verify", "--cert", cert.to_str().unwrap()])
        .env("BNGKIT_TOL", "0")
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
    let out = Command::new(env!("CARGO_BIN_EXE_bngkit"))
        .args(["verify", "--cert", cert.to_str().unwrap()])
        .env("BNGKIT_TOL", "1e-3")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
}

#[test]
fn out_dash_writes_stdout() {
    let out = bngkit(&["bound", "--mode", "typeiii", "--length", "2", "--out", "-"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_of(&out)["bound"], 1024);
    let out = bngkit(&["bound", "--mode", "calkin", "--input", ANTIPODAL]);
    assert_eq!(json_of(&out)["bound"], 46);
}

#[test]
fn small_subcommands() {
    let out = bngkit(&["order", "--input", "[0.5, 0.5, -1]"]);
    assert_eq!(json_of(&out)["stalls"], 0);

    let out = bngkit(&["split", "--input", "[0.5, -0.2]"]);
    let v = json_of(&out);
    let (a, b) = (&v["first"], &v["second"]);
    assert!((a[0].as_f64().unwrap() + b[0].as_f64().unwrap() - 0.5).abs() < 1e-15);

    let out = bngkit(&["decompose", "--kind", "torus", "--input", r#"{"phases":[0.3, 0.1]}"#]);
    assert_eq!(json_of(&out)["factors"].as_array().unwrap().len(), 2);

    let out = bngkit(&["su2", "--theta", "0.5", "--phi", "-0.7", "--m", "2"]);
    let v = json_of(&out);
    assert_eq!(v["conjugators"].as_array().unwrap().len(), 2);
    assert!(v["residual"].as_f64().unwrap() < 1e-8);

    let out = bngkit(&["dist", "--u", r#"{"phases":[0, 1]}"#, "--v", r#"{"phases":[0.5, 1.5]}"#]);
    let v = json_of(&out);
    assert!(v["proj"].as_f64().unwrap() < 1e-12);

    let spectrum = r#"{"eigenphases":[[0, 2], [3.141592653589793, 2]]}"#;
    let out = bngkit(&["commutator-witness", "--input", spectrum]);
    assert!((json_of(&out)["ratio"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let swap = r#"{"dim":2,"re":[[0,1],[1,0]],"im":[[0,0],[0,0]]}"#;
    let out = bngkit(&["doubled-commutator", "--v0", r#"{"phases":[0.3, -1]}"#, "--w0", swap]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_of(&out)["certificate"]["factors"].as_array().unwrap().len(), 4);
}

#[test]
fn selftest_single_criterion() {
    let out = bngkit(&["selftest", "--criterion", "10", "--seed", "5"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("PASS 10"), "{text}");
    let out = bngkit(&["selftest", "--criterion", "2", "--json"]);
    assert_eq!(json_of(&out)["pass"], Value::Bool(true));
}
