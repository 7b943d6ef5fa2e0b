use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use omaxcones::duality::{max_entangled, MatrixMap};
use omaxcones::random::{hermitian, rng};
use omaxcones::{BlockElement, Matrix};
use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_omaxcones"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn write(dir: &Path, name: &str, v: &impl serde::Serialize) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn classify_depolarizing_is_eb() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "depol.json", &MatrixMap::depolarizing(2, 2));
    let out = run(&["classify", s(&p)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["status"], "EB");
}

#[test]
fn maximally_entangled_is_not_separable() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "me.json", &max_entangled(2));
    let out = run(&["cone-max-test", s(&p)]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["status"], "NotMember");
    assert_eq!(v["certificate"]["kind"], "ppt-violation");
}

#[test]
fn malformed_json_is_an_error_with_position() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\"n\": 2,\n  \"m\": 2, \"flat\": [oops]}").unwrap();
    let out = run(&["cone-min-test", s(&p)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("column"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&[]).status.code(), Some(1));
    let dir = TempDir::new().unwrap();
    let e12 = write(dir.path(), "e12.json", &Matrix::<f64>::unit(2, 2, 0, 1));
    // the order norm is only defined on hermitian elements
    assert_eq!(run(&["norm", "--kind", "order", s(&e12)]).status.code(), Some(1));
}

#[test]
fn undetermined_exits_two() {
    // a generic PPT element of M_3(M_3) with a one-iteration search budget
    let h = hermitian(&mut rng(1, 0), 9);
    let a = BlockElement::from_flat(3, 3, Matrix::from_fn(9, 9, |i, j| h[(i, j)] * 0.05 + if i == j { 1.0 } else { 0.0 }))
        .unwrap();
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "ppt.json", &a);
    let out = run(&["cone-max-test", s(&p), "--restarts", "1", "--iterations", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout_json(&out)["status"], "Undetermined");
}

#[test]
fn norms() {
    let dir = TempDir::new().unwrap();
    let e12 = write(dir.path(), "e12.json", &Matrix::<f64>::unit(2, 2, 0, 1));
    let out = run(&["norm", "--kind", "min", s(&e12)]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out)["report"]["value"].as_f64().unwrap();
    assert!((v - 0.5).abs() < 1e-9);
    let out = run(&["norm", "--kind", "dec", "--tol", "1e-6", s(&e12)]);
    let r = &stdout_json(&out)["report"];
    assert!(r["bracket"][0].as_f64().unwrap() >= 0.5 - 1e-6);
}

#[test]
fn flat_reports_both_adjoints_labelled() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "id.json", &MatrixMap::identity(2));
    let v = stdout_json(&run(&["flat", s(&p)]));
    for key in ["flat_adjoint", "hilbert_schmidt_adjoint", "note"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let flat: MatrixMap = serde_json::from_value(v["flat_adjoint"].clone()).unwrap();
    assert!(flat.basis_deviation(&MatrixMap::identity(2)).unwrap() < 1e-12);
}

#[test]
fn dual_verify_and_arch() {
    let v = stdout_json(&run(&["dual-verify", "--n", "2", "--m", "2", "--samples", "40", "--seed", "3"]));
    assert_eq!(v["violations"], json!([]));
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "lex.json", &json!({"dim": 2, "oracle": "builtin:lexicographic2", "unit": [0, 1]}));
    let out = run(&["arch", s(&p), "--samples", "64"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["quotient_dim"], 1);
    assert_eq!(v["n_basis"].as_array().unwrap().len(), 1);
}

#[test]
fn emitted_certificates_reverify() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("classify", write(dir.path(), "depol.json", &MatrixMap::depolarizing(2, 2))),
        ("classify", write(dir.path(), "id.json", &MatrixMap::identity(2))),
        ("cone-max-test", write(dir.path(), "me.json", &max_entangled(2))),
        ("cone-min-test", write(dir.path(), "me2.json", &max_entangled(2))),
    ];
    for (i, (cmd, input)) in cases.iter().enumerate() {
        let cert = dir.path().join(format!("cert{i}.json"));
        assert_eq!(run(&[cmd, s(input), "--emit-certificates", s(&cert)]).status.code(), Some(0));
        let out = run(&["--verify", s(&cert)]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
        assert_eq!(stdout_json(&out)["ok"], true);
    }
    // a verdict attached to a different input is caught by direct evaluation
    let cert = dir.path().join("cert2.json");
    let mut bundle: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    bundle["element"] = serde_json::to_value(BlockElement::unit(2, 2)).unwrap();
    let tampered = write(dir.path(), "tampered.json", &bundle);
    let out = run(&["--verify", s(&tampered)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["ok"], false);
}

fn manifest(dir: &Path) -> PathBuf {
    std::fs::write(dir.join("id.json"), serde_json::to_string(&MatrixMap::identity(2)).unwrap()).unwrap();
    write(
        dir,
        "manifest.json",
        &json!([
            {"command": "classify", "seed": 1, "input": MatrixMap::depolarizing(2, 2)},
            {"command": "classify", "seed": 1, "input_file": "id.json"},
            {"command": "classify", "seed": 1, "input": {"k": 2, "m": 2, "kind": "kraus"}},
        ]),
    )
}

#[test]
fn batch_counts_and_order() {
    let dir = TempDir::new().unwrap();
    let m = manifest(dir.path());
    let out = run(&["batch", s(&m)]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!((v["ok"].as_u64(), v["error"].as_u64()), (Some(2), Some(1)));
    let r = v["results"].as_array().unwrap();
    assert_eq!(r[0]["result"]["status"], "EB");
    assert_eq!(r[1]["result"]["status"], "CPNotEB");
    assert_eq!(r[2]["status"], "error");
    assert!((0..3).all(|i| r[i]["index"] == i));
}

#[test]
fn batch_is_deterministic_across_pool_sizes() {
    let dir = TempDir::new().unwrap();
    let m = manifest(dir.path());
    let a = bin().args(["batch", s(&m)]).env("OMAXCONES_THREADS", "1").output().unwrap();
    let b = bin().args(["batch", s(&m)]).env("OMAXCONES_THREADS", "3").output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn batch_edge_cases() {
    let dir = TempDir::new().unwrap();
    let empty = write(dir.path(), "empty.json", &json!([]));
    let v = stdout_json(&run(&["batch", s(&empty)]));
    assert_eq!(v, json!({"jobs": 0, "ok": 0, "error": 0, "undetermined": 0, "results": []}));
    let unseeded = write(dir.path(), "unseeded.json", &json!([{"command": "selftest"}]));
    let v = stdout_json(&run(&["batch", s(&unseeded)]));
    assert_eq!(v["error"], 1);
    assert!(v["results"][0]["error"].as_str().unwrap().contains("seed"));
    let not_array = write(dir.path(), "obj.json", &json!({"command": "classify"}));
    assert_eq!(run(&["batch", s(&not_array)]).status.code(), Some(1));
}

#[test]
fn text_format_and_output_file() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "depol.json", &MatrixMap::depolarizing(2, 2));
    let out = run(&["classify", s(&p), "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "status: EB"), "{text}");
    let dest = dir.path().join("out.json");
    let out = run(&["classify", s(&p), "--output", s(&dest)]);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&dest).unwrap()).unwrap();
    assert_eq!(v["status"], "EB");
}

#[test]
fn selftest_is_byte_identical_across_runs() {
    let a = run(&["selftest", "--seed", "0"]);
    let b = run(&["selftest", "--seed", "0"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout_json(&a)["criteria"].as_array().unwrap().len(), 8);
}
