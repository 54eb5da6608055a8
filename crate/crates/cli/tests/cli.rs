use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn instance(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pfdisc")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn path(name: &str) -> String {
    instance(name).to_string_lossy().into_owned()
}

#[test]
fn decide_hamilton_cube_is_decomposable() {
    let out = run(&["decide", &path("hamilton_cube.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["verdict"], "decomposable");
    assert!(r["certificate"].is_object());
}

#[test]
fn decide_eight_squares_is_indecomposable() {
    let out = run(&["decide", &path("eight_squares.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["verdict"], "indecomposable");
    assert!(r["certificate"].is_null());
}

#[test]
fn analyze_switch() {
    let out = run(&["analyze", &path("switch_m4.json")]);
    assert_eq!(out.status.code(), Some(0));
    let c = &report(&out)["classification"];
    assert_eq!(c["type"], "unitary");
    assert_eq!(c["inner_type"], true);
    assert_eq!(c["capacity"], 4);
}

#[test]
fn decompose_then_verify() {
    let dir = std::env::temp_dir().join(format!("pfdisc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cert = dir.join("cert.json");
    let cert_s = cert.to_string_lossy().into_owned();
    let out = run(&["decompose", &path("hamilton_cube.json"), "--json-out", &cert_s]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["verify", &path("hamilton_cube.json"), &cert_s]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["valid"], true);

    // the same certificate does not fit another algebra of the same dimension
    let out = run(&["verify", &path("eight_squares.json"), &cert_s]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["valid"], false);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn exit_codes() {
    let out = run(&["decompose", &path("eight_squares.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["verdict"], "indecomposable");

    let out = run(&["decide", "/nonexistent/instance.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
}

#[test]
fn schema_errors_are_located() {
    let dir = std::env::temp_dir().join(format!("pfdisc-schema-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cases = [
        ("cap2.json", r#"{"field": {"kind": "rational"}, "factors": [{"kind": "quaternion", "a": "-1", "b": "-1", "involution": "canonical"}]}"#, "capacity"),
        ("diag.json", r#"{"field": {"kind": "rational"}, "factors": [{"kind": "matrix", "n": 4, "involution": {"adjoint_diag": ["1", "1", "0", "1"]}}]}"#, "factors[0].involution.adjoint_diag"),
        ("syntax.json", "{\"field\":\n {,}", "line 2"),
    ];
    for (name, body, needle) in cases {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        let out = run(&["decide", &p.to_string_lossy()]);
        assert_eq!(out.status.code(), Some(1), "{name}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{name}: {err}");
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn output_is_deterministic() {
    for cmd in ["decide", "pfister", "crosscheck"] {
        let a = run(&[cmd, &path("unitary_gaussian.json")]);
        let b = run(&[cmd, &path("unitary_gaussian.json")]);
        assert_eq!(a.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
}

#[test]
fn basechange_kills_the_eight_square_form() {
    let out = run(&["basechange", &path("eight_squares.json"), "--d", "-1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["hyperbolic_before"], false);
    assert_eq!(r["hyperbolic_after"], true);
}
