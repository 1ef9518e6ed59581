use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn fixture(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("fixtures");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drinfeld"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let o = run(&full);
    let v = serde_json::from_slice(&o.stdout).unwrap_or(Value::Null);
    (o.status.code().unwrap(), v)
}

#[test]
fn verify_passes_on_the_companion_ladder() {
    let o = run(&["verify", &fixture("ladder_companion.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("abelian_sheaf: pass"));
}

#[test]
fn verify_reports_the_failed_clause() {
    let o = run(&["verify", &fixture("phi_tau2_rank1.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[FAIL] degree equals rank"));
    let o = run(&["verify", &fixture("ladder_singular.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[FAIL] τ cokernel"));
}

#[test]
fn input_errors_exit_with_two() {
    let o = run(&["verify", &fixture("malformed.json")]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("malformed.json:2:"), "{err}");
    let o = run(&["verify", &fixture("bad_schema.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("$.ring"));
    assert_eq!(run(&["verify", "/nonexistent/doc.json"]).status.code(), Some(2));
    assert_eq!(run(&["extend", &fixture("phi_tau2.json")]).status.code(), Some(2));
}

#[test]
fn caps_exit_with_three() {
    let o = run(&["--candidate-cap", "5", "extend", &fixture("phi_tau2.json"), &fixture("cover_y2.json")]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn extend_reproduces_the_two_class_fiber() {
    let (code, v) = json(&["extend", "--classes", "--galois", "2", &fixture("extend_job.json")]);
    assert_eq!(code, 0);
    let r = &v["result"];
    assert_eq!(r["solutions"], serde_json::json!([[0, 1], [0, 2]]));
    assert_eq!(r["classes"], serde_json::json!([[0], [1]]));
    assert_eq!(r["aut_order"], 2);
    let table: Vec<(u64, u64, u64)> = r["galois"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| {
            (
                row["degree"].as_u64().unwrap(),
                row["solutions"].as_u64().unwrap(),
                row["classes"].as_u64().unwrap(),
            )
        })
        .collect();
    assert_eq!(table, vec![(1, 2, 2), (2, 4, 1)]);
}

#[test]
fn extend_reports_an_empty_fiber() {
    let o = run(&["extend", &fixture("phi_tau2_plus_tau.json"), &fixture("cover_y2.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("no extensions"));
    let o = run(&["extend", "--classes", &fixture("phi_tau2.json"), &fixture("cover_identity.json")]);
    assert!(stdout(&o).contains("[0] y ↦ τ^2"));
    assert!(stdout(&o).contains("1 isomorphism classes"));
}

#[test]
fn isom_finds_the_twist() {
    let o = run(&["isom", "--twist", "3", &fixture("phi_plus.json"), &fixture("phi_minus.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("no isomorphism; minimal twist degree 2"));
    let o = run(&["isom", &fixture("phi_plus.json"), &fixture("phi_plus.json")]);
    assert!(stdout(&o).contains("ε = 1"));
    let (_, v) = json(&["twist", &fixture("shtuka_plus.json"), &fixture("shtuka_minus.json")]);
    assert_eq!(v["result"]["twist_degree"], 2);
    let (_, v) = json(&["aut", &fixture("phi_tau2.json")]);
    assert_eq!(v["result"]["elements"], serde_json::json!([1, 2]));
}

#[test]
fn pushed_ladders_are_isomorphic_by_a_sign_change() {
    let dir = tempfile::tempdir().unwrap();
    let plus = dir.path().join("plus.json");
    let minus = dir.path().join("minus.json");
    for (src, dst) in [("ladder_plus.json", &plus), ("ladder_minus.json", &minus)] {
        let o = run(&["push", &fixture(src), &fixture("cover_y2.json"), "--out", dst.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let (_, v) = json(&["isom", plus.to_str().unwrap(), minus.to_str().unwrap()]);
    let diag = serde_json::json!([[[1], []], [[], [2]]]);
    let isos = v["result"]["isomorphisms"].as_array().unwrap();
    assert!(isos.contains(&serde_json::json!([diag.clone(), diag])));
    let o = run(&["isom", &fixture("ladder_plus.json"), &fixture("ladder_minus.json")]);
    assert!(stdout(&o).contains("no isomorphism"));
}

#[test]
fn push_and_motive_agree_on_the_companion_ladder() {
    let (_, pushed) = json(&["push", &fixture("ladder_plus.json"), &fixture("cover_y2.json")]);
    let (_, motive) = json(&["motive", &fixture("phi_tau2.json")]);
    assert_eq!(pushed["documents"][0], motive["documents"][0]);
    let (_, restricted) = json(&["restrict", &fixture("phi_plus.json"), &fixture("cover_y2.json")]);
    assert_eq!(restricted["documents"][0]["gen_image"], serde_json::json!([0, 0, 1]));
    assert_eq!(restricted["documents"][0]["rank"], 2);
}

#[test]
fn identity_cover_echoes_the_input() {
    let (_, once) = json(&["restrict", &fixture("phi_plus.json"), &fixture("cover_y2.json")]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let doc = once["documents"][0].clone();
    std::fs::write(&path, doc.to_string()).unwrap();
    let id = dir.path().join("id.json");
    std::fs::write(&id, r#"{"kind": "cover", "field": {"p": 3}, "p_poly": [0, 1]}"#).unwrap();
    let mut aprime = doc.clone();
    aprime["ring"] = "Aprime".into();
    std::fs::write(&path, aprime.to_string()).unwrap();
    let (_, again) = json(&["restrict", path.to_str().unwrap(), id.to_str().unwrap()]);
    let mut back = again["documents"][0].clone();
    back["ring"] = "Aprime".into();
    assert_eq!(back, aprime);
}

#[test]
fn emitted_documents_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<Vec<String>> = vec![
        vec!["restrict".into(), fixture("phi_plus.json"), fixture("cover_y2.json")],
        vec!["push".into(), fixture("ladder_minus.json"), fixture("cover_y2.json")],
        vec!["push".into(), fixture("shtuka_plus.json"), fixture("cover_y2.json")],
        vec!["motive".into(), fixture("phi_tau2.json")],
    ];
    for (k, args) in cases.iter().enumerate() {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (code, v) = json(&args);
        assert_eq!(code, 0);
        let doc = &v["documents"][0];
        let path = dir.path().join(format!("doc{k}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(doc).unwrap()).unwrap();
        let (code, re) = json(&["verify", path.to_str().unwrap()]);
        assert_eq!(code, 0);
        assert_eq!(re["verification"][0], v["verification"][0]);
        let (_, motive_of_doc) = json(&["verify", path.to_str().unwrap()]);
        assert_eq!(motive_of_doc["result"], re["result"]);
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(re["inputs"][0]["sha256"], hex::encode(Sha256::digest(&bytes)));
    }
}

#[test]
fn reports_are_byte_stable_and_thread_independent() {
    let args = ["extend", "--classes", "--galois", "2", &fixture("extend_job.json")];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let (_, one) = json(&["--threads", "1", "sheaf-structures", &fixture("ladder_companion.json"), &fixture("cover_y2.json")]);
    let (_, four) = json(&["--threads", "4", "sheaf-structures", &fixture("ladder_companion.json"), &fixture("cover_y2.json")]);
    assert_eq!(one["result"], four["result"]);
    assert_eq!(one["result"]["classes"], serde_json::json!([[0], [1]]));
}

#[test]
fn field_documents_and_jobs_parse() {
    let o = run(&["verify", &fixture("f9.json"), &fixture("f3.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("field of size 9"));
}

#[test]
fn selftest_passes() {
    let o = run(&["selftest", "--seed", "11", "--rounds", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
