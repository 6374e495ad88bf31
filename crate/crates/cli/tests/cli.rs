use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn worm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_worm")).args(args).output().expect("spawn worm")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).trim().to_string()
}

fn ok(args: &[&str]) -> String {
    let out = worm(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    stdout(&out)
}

fn scratch_file(name: &str, contents: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn differential_of_a_square() {
    assert_eq!(ok(&["d", "--a", "1", "--k", "1", "--coords", "x", "--expr", "x^2"]), "2*x*d{1}x");
}

#[test]
fn second_differential_is_rightmost_first() {
    let s = ok(&["d", "--a", "1,2", "--k", "2", "--coords", "x", "--expr", "x^2"]);
    let t = ok(&["eval", "--coords", "x", "--k", "2", "--expr", "2*d{1}x*d{2}x + 2*x*d{1,2}x"]);
    assert_eq!(s, t);
}

#[test]
fn gaussian_integral() {
    let expr = "exp(-x^2 - d{1,2}x^2)*d{1}x*d{2}x";
    for path in ["analytic", "pure"] {
        let out = ok(&["integrate", "--coords", "x", "--k", "2", "--expr", expr, "--path", path, "--json"]);
        let v: Value = serde_json::from_str(&out).unwrap();
        let value = v["value"].as_f64().unwrap();
        assert!((value - std::f64::consts::PI).abs() < 1e-6, "{path}: {value}");
    }
    let text = ok(&["integrate", "--coords", "x", "--k", "2", "--expr", expr]);
    assert!(text.starts_with("3.14159265"), "{text}");
}

#[test]
fn integrate_reads_quadrature_config() {
    let cfg = scratch_file("gh.toml", "method = \"gauss-hermite\"\nnodes = 16\ntolerance = 1e-10\n");
    let out = ok(&[
        "integrate", "--coords", "x", "--k", "2", "--path", "pure", "--json",
        "--expr", "exp(-x^2 - d{1,2}x^2)*d{1}x*d{2}x",
        "--config", cfg.to_str().unwrap(),
    ]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!((v["value"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-8);

    let bad = scratch_file("bad.toml", "nodes = 16\nfrobnicate = true\n");
    let out = worm(&["integrate", "--coords", "x", "--k", "2", "--expr", "x", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cohomology_table() {
    assert_eq!(ok(&["cohomology", "--k", "2", "--n", "1", "--weights", "0..2"]), "[1,0,0]");
}

#[test]
fn riemann_on_the_sphere() {
    let out = ok(&["riemann", "--coords", "th,ph", "--k", "2", "--metric", "1,0; 0,sin(th)^2", "--json"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["matches_classical"], Value::Bool(true));
    let r = v["riemann"].as_array().unwrap();
    assert!(r.iter().any(|e| e["index"] == serde_json::json!([0, 1, 0, 1]) && e["value"] == "sin(th)^2"));
}

#[test]
fn chart_from_file() {
    let chart = scratch_file("chart.toml", "name = \"R2\"\ncoords = [\"u\", \"v\"]\nlevel = 1\n");
    let out = ok(&["d", "--chart", chart.to_str().unwrap(), "--a", "1", "--expr", "u*v"]);
    assert_eq!(out, ok(&["eval", "--coords", "u,v", "--expr", "v*d{1}u + u*d{1}v"]));
}

#[test]
fn dgca_examples() {
    assert!(ok(&["dgca", "--algebra", "su2"]).ends_with("jacobi: true, d^2 = 0: true"));
    let perturbed = ok(&["dgca", "--algebra", "su2", "--perturb", "--seed", "7"]);
    assert!(perturbed.ends_with("d^2 = 0: false"), "{perturbed}");

    let conn = scratch_file("conn.toml", "coords = [\"x\", \"y\"]\nforms = [\"y*d{1}x\"]\n");
    let out = ok(&["dgca", "--algebra", "abelian1", "--connection", conn.to_str().unwrap(), "--json"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["flat"], Value::Bool(false));
    let conn = scratch_file("exact.toml", "coords = [\"x\", \"y\"]\nforms = [\"y*d{1}x + x*d{1}y\"]\n");
    let out = ok(&["dgca", "--algebra", "abelian1", "--connection", conn.to_str().unwrap(), "--json"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["flat"], Value::Bool(true));
}

#[test]
fn exit_codes() {
    assert_eq!(worm(&["eval", "--expr", "x + 1"]).status.code(), Some(0));
    // domain errors
    assert_eq!(worm(&["eval", "--expr", "x +"]).status.code(), Some(1));
    assert_eq!(worm(&["d", "--coords", "x", "--k", "1", "--a", "2", "--expr", "x"]).status.code(), Some(1));
    assert_eq!(worm(&["eval", "--coords", "x", "--expr", "d{1}y"]).status.code(), Some(1));
    // usage errors
    assert_eq!(worm(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(worm(&["d", "--coords", "x"]).status.code(), Some(2));
    assert_eq!(worm(&["cohomology", "--weights", "5"]).status.code(), Some(2));
    assert_eq!(worm(&["riemann", "--coords", "x", "--k", "1", "--metric", "1"]).status.code(), Some(2));

    let err = worm(&["eval", "--expr", "x +"]);
    assert!(String::from_utf8_lossy(&err.stderr).contains("parse error"));
}

#[test]
fn json_output_matches_schema() {
    let schema: Value =
        serde_json::from_str(include_str!("../schema/output.schema.json")).expect("schema is JSON");
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let conn = scratch_file("schema_conn.toml", "coords = [\"x\", \"y\"]\nforms = [\"y*d{1}x\"]\n");
    let conn = conn.to_str().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["eval", "--expr", "sin(x)^2 + cos(x)^2", "--equal", "1"],
        vec!["eval", "--expr", "x*y", "--at", "x=1,y=2"],
        vec!["eval", "--coords", "x", "--k", "2", "--expr", "d{2}x*d{1}x"],
        vec!["d", "--a", "1", "--k", "1", "--coords", "x", "--expr", "x^2"],
        vec!["lift", "--coords", "x,y", "--k", "2", "--field", "t1*D2", "--expr", "d{1}x*y"],
        vec!["pullback", "--coords", "t", "--map", "y = t^2", "--expr", "d{1}y"],
        vec!["integrate", "--coords", "x", "--k", "2", "--expr", "exp(-x^2 - d{1,2}x^2)*d{1}x*d{2}x"],
        vec!["riemann", "--coords", "x,y", "--k", "2", "--metric", "1,0; 0,1"],
        vec!["riemann", "--coords", "x,y", "--k", "2", "--characterize", "1"],
        vec!["cohomology", "--k", "1", "--n", "2", "--weights", "0..3"],
        vec!["dgca", "--algebra", "heisenberg"],
        vec!["dgca", "--algebra", "abelian1", "--connection", conn],
    ];
    for mut args in runs {
        args.push("--json");
        let v: Value = serde_json::from_str(&ok(&args)).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}\n{v}");
    }
    // and the schema actually rejects things
    assert!(!validator.is_valid(&serde_json::json!({ "command": "cohomology", "k": 1 })));
}

#[test]
fn seeded_output_is_reproducible() {
    let args = ["eval", "--expr", "exp(x)*exp(y)", "--equal", "exp(x+y)", "--seed", "42", "--json"];
    assert_eq!(ok(&args), ok(&args));
}
