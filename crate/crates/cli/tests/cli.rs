use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

const SCHEMA: &str = include_str!("../schemas/hefdiv.schema.json");

fn hefdiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hefdiv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn conforms(def: &str, v: &Value) {
    let mut schema: Value = serde_json::from_str(SCHEMA).unwrap();
    schema["$ref"] = json!(format!("#/$defs/{def}"));
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{def}: {errors:?}");
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

/// Last stderr line is the manifest.
fn manifest(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    serde_json::from_str(text.lines().last().expect("manifest line")).expect("manifest JSON")
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p.display().to_string()
}

fn poly(nvars: usize, terms: &[(&[u32], &str)]) -> Value {
    json!({"nvars": nvars, "tau": 0, "terms": terms.iter().map(|(e, c)| json!([e, c])).collect::<Vec<_>>()})
}

fn bezout_problem() -> Value {
    json!({
        "n": 1,
        "P": {"rows": 1, "cols": 2, "entries": [[
            poly(1, &[(&[2], "1")]),
            poly(1, &[(&[0], "1"), (&[1], "-2"), (&[2], "1")])
        ]]},
        "Phi": [poly(1, &[(&[0], "1")])],
        "rho": 0
    })
}

#[test]
fn bound_prints_value() {
    let o = hefdiv(&["bound", "--method", "eliot", "--n", "2", "--m", "4", "--r", "2", "--deg", "3,2,2,1", "--rho", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "10");
    let m = manifest(&o);
    conforms("manifest", &m);
    assert_eq!(m["outcome"], "ok");
}

#[test]
fn bound_rejects_inapplicable_method() {
    let o = hefdiv(&["bound", "--method", "koszul", "--n", "1", "--m", "3", "--r", "2", "--deg", "1,1,1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn missing_input_is_usage_error() {
    let o = hefdiv(&["solve", "--in", "missing.json"]);
    assert_eq!(code(&o), 2);
    assert_eq!(manifest(&o)["outcome"], "usage_error");
}

#[test]
fn unknown_subcommand_is_usage_error() {
    assert_eq!(code(&hefdiv(&["frobnicate"])), 2);
    assert_eq!(code(&hefdiv(&["--help"])), 0);
}

#[test]
fn solve_bezout() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "p.json", &bezout_problem());
    let o = hefdiv(&["solve", "--in", &path, "--method", "macaulay", "--minimize"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    conforms("solution", &v);
    assert_eq!(v["cap_used"], 3);
    assert_eq!(v["minimal_cap"], 3);
    assert_eq!(v["identity_verified"], true);
    assert_eq!(v["Q"][0], poly(1, &[(&[0], "3/1"), (&[1], "-2/1")]));
    let m = manifest(&o);
    assert_eq!(m["input_hashes"].as_object().unwrap().len(), 1);
}

#[test]
fn solve_below_need_is_domain_failure() {
    // z² Q₁ + z Q₂ = 1 has no solution at any cap
    let dir = tempfile::tempdir().unwrap();
    let prob = json!({
        "n": 1,
        "P": {"rows": 1, "cols": 2, "entries": [[poly(1, &[(&[2], "1")]), poly(1, &[(&[1], "1")])]]},
        "Phi": [poly(1, &[(&[0], "1")])],
        "rho": 0
    });
    let path = write(dir.path(), "p.json", &prob);
    let o = hefdiv(&["solve", "--in", &path, "--method", "koszul"]);
    assert_eq!(code(&o), 1);
    assert_eq!(manifest(&o)["outcome"], "domain_failure");
}

#[test]
fn certify_with_common_zero_fails() {
    let dir = tempfile::tempdir().unwrap();
    let p = json!({"rows": 1, "cols": 2, "entries": [[poly(1, &[(&[2], "1")]), poly(1, &[(&[1], "1"), (&[2], "1")])]]});
    let path = write(dir.path(), "p.json", &p);
    assert_eq!(code(&hefdiv(&["certify", "--in", &path])), 1);

    let path = write(dir.path(), "ok.json", &bezout_problem());
    let o = hefdiv(&["certify", "--in", &path]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    conforms("certificate", &v);
    assert_eq!(v["identity_verified"], true);
}

#[test]
fn complex_and_tower_outputs_conform() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "p.json", &bezout_problem());
    let o = hefdiv(&["complex", "--in", &path, "--kind", "koszul"]);
    assert_eq!(code(&o), 0);
    conforms("complex", &stdout_json(&o));
    assert_eq!(manifest(&o)["seed"], hefdiv_cli::DEFAULT_SEED);
    for flavor in ["affine", "projective"] {
        let o = hefdiv(&["hefer", "--in", &path, "--flavor", flavor]);
        assert_eq!(code(&o), 0);
        let v = stdout_json(&o);
        conforms("tower", &v);
        assert_eq!(v["flavor"], flavor);
    }
}

#[test]
fn symbolic_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "p.json", &bezout_problem());
    for args in [
        vec!["hefer", "--in", &path, "--flavor", "projective"],
        vec!["complex", "--in", &path, "--kind", "buchsbaum-rim"],
        vec!["solve", "--in", &path, "--method", "eliot"],
    ] {
        let a = hefdiv(&args);
        let b = hefdiv(&args);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn manifest_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let mpath = dir.path().join("run.json");
    let out = dir.path().join("out.txt");
    let o = hefdiv(&[
        "bound", "--method", "macaulay", "--n", "1", "--m", "2", "--r", "1", "--deg", "2,2",
        "--manifest", mpath.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty() && o.stderr.is_empty());
    assert_eq!(fs::read_to_string(out).unwrap().trim(), "3");
    let m: Value = serde_json::from_str(&fs::read_to_string(mpath).unwrap()).unwrap();
    conforms("manifest", &m);
    assert_eq!(m["command"], "bound");
}

#[test]
fn quadcheck_passes_and_fails_by_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(dir.path(), "ok.json", &json!({"n": 1, "resolution": 32, "tolerance": 1e-6}));
    let o = hefdiv(&["quadcheck", "fs-mass", "--spec", &ok]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    conforms("quadcheck", &v);
    assert!((v["reports"][0]["value"][0].as_f64().unwrap() - 1.0).abs() < 1e-6);
    let m = manifest(&o);
    conforms("manifest", &m);
    assert_eq!(m["tolerances"]["tolerance"], 1e-6);

    let tight = write(
        dir.path(),
        "tight.json",
        &json!({"n": 2, "resolution": 16, "tolerance": 1e-14, "max_resolution": 32}),
    );
    let o = hefdiv(&["quadcheck", "fs-mass", "--spec", &tight]);
    assert_eq!(code(&o), 3);
    assert_eq!(manifest(&o)["outcome"], "tolerance_failure");

    let bad = write(dir.path(), "bad.json", &json!({"n": 1, "resolution": 4}));
    assert_eq!(code(&hefdiv(&["quadcheck", "fs-mass", "--spec", &bad])), 2);
}

#[test]
fn quadcheck_reproduce_moments_divide() {
    let dir = tempfile::tempdir().unwrap();
    let spec = json!({
        "phi": poly(2, &[(&[1, 1], "1")]),
        "points": [[[-0.3333333333333333, 0.0]], [[0.5, 0.5]]],
        "tolerance": 1e-4
    });
    let o = hefdiv(&["quadcheck", "reproduce", "--spec", &write(dir.path(), "r.json", &spec)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    conforms("quadcheck", &stdout_json(&o));

    let spec = json!({"alpha": [1], "beta": [1], "radius": 2.0, "tolerance": 1e-8});
    let o = hefdiv(&["quadcheck", "moments", "--spec", &write(dir.path(), "m.json", &spec)]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    // ∫_{|w|=2} |w|² w̄ dw = 2πi · 2⁴
    assert!((v["reports"][0]["value"][1].as_f64().unwrap() - 32.0 * std::f64::consts::PI).abs() < 1e-8);

    let prob = json!({
        "n": 1,
        "P": {"rows": 1, "cols": 2, "entries": [[poly(1, &[(&[1], "1")]), poly(1, &[(&[0], "1"), (&[1], "-1")])]]},
        "Phi": [poly(1, &[(&[0], "1")])],
        "rho": 0
    });
    let spec = json!({"problem": prob, "points": [[[0.25, 0.0]], [[0.5, 0.0]]], "tolerance": 1e-6});
    let o = hefdiv(&["quadcheck", "divide", "--spec", &write(dir.path(), "d.json", &spec)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let v = stdout_json(&o);
    conforms("quadcheck", &v);
    assert!(v["reports"][1]["residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn corpus_is_deterministic_and_conforms() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = hefdiv(&["corpus", "--seed", "7", "--profile", "br-r2", "--count", "3", "--dir", dir.path().to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        conforms("corpus_index", &stdout_json(&o));
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 7);
    for name in names {
        let x = fs::read(a.path().join(&name)).unwrap();
        let y = fs::read(b.path().join(&name)).unwrap();
        assert_eq!(x, y, "{name:?}");
        let v: Value = serde_json::from_slice(&x).unwrap();
        let name = name.to_string_lossy();
        if name.ends_with(".meta.json") {
            conforms("corpus_meta", &v);
        } else if name != "index.json" {
            conforms("problem", &v);
        }
    }
}
