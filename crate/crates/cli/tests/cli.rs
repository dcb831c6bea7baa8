use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kpotent_core::generate::{CertificateJson, WitnessJson};
use kpotent_core::preserver::{equivalent, IdentityWitness, IdentityWitnessJson, MapOracle, OracleSpec, StructuredMapJson};
use kpotent_core::{Certificate, Closure, ExactMatrix, LemmaReport, SimplicityWitness, StructuredMap};
use tempfile::TempDir;

fn kpotent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kpotent"))
        .args(args)
        .env_remove("KPOTENT_P")
        .env_remove("KPOTENT_N")
        .env_remove("KPOTENT_K")
        .env_remove("KPOTENT_OUT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn write_matrix(dir: &TempDir, name: &str, x: &ExactMatrix) -> PathBuf {
    write(dir, name, &serde_json::to_string(&x.to_json()).unwrap())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn certify_identity_is_a_leaf() {
    let dir = TempDir::new().unwrap();
    let f = Closure::prime(5).unwrap();
    let m = write_matrix(&dir, "i.json", &ExactMatrix::identity(&f, 3));
    let o = kpotent(&["certify", s(&m)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let j: CertificateJson = serde_json::from_str(stdout(&o).trim()).unwrap();
    let cert = Certificate::from_json(&f, &j).unwrap();
    assert_eq!(cert.depth(), 0);
    assert!(stderr(&o).contains("OK depth=0"));
}

#[test]
fn certify_writes_a_certificate_that_evaluates_back() {
    let dir = TempDir::new().unwrap();
    let f = Closure::prime(5).unwrap();
    let x = ExactMatrix::from_ints(&f, &[vec![1, 4, 0], vec![2, 0, 3], vec![0, 1, 1]]).unwrap();
    let m = write_matrix(&dir, "x.json", &x);
    let out = dir.path().join("cert.json");
    let o = kpotent(&["certify", s(&m), "--k", "3", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("OK depth="));
    let j: CertificateJson = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(Certificate::from_json(&f, &j).unwrap().eval(3).unwrap(), x);
}

#[test]
fn malformed_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "bad.json", "{\"p\": 5, \"n\": 2");
    assert_eq!(kpotent(&["certify", s(&m)]).status.code(), Some(2));
    assert_eq!(kpotent(&["certify", "/nonexistent/file.json"]).status.code(), Some(2));
    let f = Closure::prime(5).unwrap();
    let m = write_matrix(&dir, "i.json", &ExactMatrix::identity(&f, 2));
    let o = kpotent(&["certify", s(&m), "--p", "7"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("conflicts"));
}

#[test]
fn witness_of_zero_exits_2() {
    let dir = TempDir::new().unwrap();
    let f = Closure::prime(5).unwrap();
    let m = write_matrix(&dir, "z.json", &ExactMatrix::zeros(&f, 2));
    assert_eq!(kpotent(&["witness", s(&m)]).status.code(), Some(2));
}

#[test]
fn witness_replays_and_tampering_is_caught() {
    let dir = TempDir::new().unwrap();
    let f = Closure::prime(5).unwrap();
    let e12 = ExactMatrix::unit(&f, 2, 0, 1);
    let m = write_matrix(&dir, "e12.json", &e12);
    let w = dir.path().join("w.json");
    let o = kpotent(&["witness", s(&m), "--out", s(&w)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let o = kpotent(&["replay", s(&w), s(&m)]);
    assert_eq!(o.status.code(), Some(0));
    let j: WitnessJson = serde_json::from_str(&std::fs::read_to_string(&w).unwrap()).unwrap();
    let wit = SimplicityWitness::from_json(&f, &j).unwrap();
    assert!(wit.steps.last().unwrap().result.is_identity());

    // scale the result of step 1 so it no longer matches its recomputation
    let mut bad = wit.clone();
    let step = 1.min(bad.steps.len() - 1);
    bad.steps[step].result = bad.steps[step].result.scale(&f.int(2)).unwrap();
    let t = write(&dir, "bad.json", &serde_json::to_string(&bad.to_json()).unwrap());
    let o = kpotent(&["replay", s(&t), s(&m)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains(&format!("FAIL at step {step}")), "{}", stdout(&o));
}

#[test]
fn canonicalize_round_trips_a_canonical_spec() {
    let dir = TempDir::new().unwrap();
    let f = Closure::prime(5).unwrap();
    let t = ExactMatrix::from_ints(&f, &[vec![1, 2], vec![0, 3]]).unwrap();
    let map = StructuredMap::canonical(f.int(-1), t, 1, true, 2).unwrap();
    let spec = OracleSpec {
        p: Some(5),
        n: Some(2),
        map: (&map).into(),
    };
    let path = write(&dir, "spec.json", &serde_json::to_string(&spec).unwrap());
    let o = kpotent(&["canonicalize", s(&path)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let j: StructuredMapJson = serde_json::from_str(stdout(&o).trim()).unwrap();
    let back = StructuredMap::from_json(&f, &j).unwrap();
    assert!(equivalent(&map, &back, &f, 20));
}

#[test]
fn canonicalize_constant_spec() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "c.json", r#"{"p": 3, "n": 2, "map": {"type": "constant", "value": {"p": 3, "n": 2, "entries": [[{"m":1,"c":[1]},{"m":1,"c":[1]}],[{"m":1,"c":[0]},{"m":1,"c":[0]}]]}}}"#);
    let o = kpotent(&["canonicalize", s(&path)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let j: StructuredMapJson = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert!(matches!(j, StructuredMapJson::Constant { .. }));
}

#[test]
fn non_preserver_exits_3_with_a_witness_that_rechecks() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "s.json", r#"{"p": 3, "n": 2, "map": {"type": "entrywise", "op": {"op": "affine", "a": {"m":1,"c":[1]}, "b": {"m":1,"c":[1]}}}}"#);
    let o = kpotent(&["canonicalize", s(&path)]);
    assert_eq!(o.status.code(), Some(3));
    let line = stderr(&o).lines().next().unwrap().to_string();
    let j: IdentityWitnessJson = serde_json::from_str(&line).unwrap();
    let f = Closure::prime(3).unwrap();
    let w = IdentityWitness::from_json(&f, &j).unwrap();
    let spec: OracleSpec = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let oracle = MapOracle::from_spec(&f, 2, &spec).unwrap();
    assert!(w.recheck(&oracle, 2).unwrap());
}

#[test]
fn verify_map_identity_transpose_and_shift() {
    let dir = TempDir::new().unwrap();
    for (name, spec, code) in [
        ("id.json", r#"{"map": {"type": "identity"}}"#, 0),
        ("tr.json", r#"{"map": {"type": "transpose"}}"#, 0),
        (
            "shift.json",
            r#"{"map": {"type": "shift", "add": {"p": 5, "n": 2, "entries": [[{"m":1,"c":[1]},{"m":1,"c":[0]}],[{"m":1,"c":[0]},{"m":1,"c":[0]}]]}}}"#,
            3,
        ),
    ] {
        let path = write(&dir, name, spec);
        let o = kpotent(&["verify-map", s(&path), "--p", "5", "--n", "2", "--samples", "30"]);
        assert_eq!(o.status.code(), Some(code), "{name}: {}", stderr(&o));
        let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
        assert_eq!(v["verdict"], if code == 0 { "pass" } else { "fail" });
        assert_eq!(v.get("witness").is_some(), code != 0);
    }
}

fn reports(text: &str) -> Vec<LemmaReport> {
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn lemma_suite_small_config_passes_in_id_order() {
    let o = kpotent(&["lemma-suite", "--p", "3", "--n", "2", "--m", "4", "--samples", "15"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rs = reports(&stdout(&o));
    assert!(rs.iter().all(LemmaReport::passed));
    let ids: Vec<&str> = rs.iter().map(|r| r.lemma_id.as_str()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);

    // p = 3 divides m - 1 = 3, so the census carries [[1,1],[0,1]]
    let census = rs.iter().find(|r| r.lemma_id == "potent.nondiagonalizable_witness").unwrap();
    let f = Closure::prime(3).unwrap();
    let a = ExactMatrix::from_ints(&f, &[vec![1, 1], vec![0, 1]]).unwrap();
    assert!(census.evidence.iter().any(|e| ExactMatrix::from_json(&f, &e.matrix).unwrap() == a));
}

#[test]
fn lemma_suite_is_deterministic_and_env_driven() {
    let strip = |text: String| -> Vec<serde_json::Value> {
        text.lines()
            .map(|l| {
                let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
                v.as_object_mut().unwrap().remove("wall_ms");
                v
            })
            .collect()
    };
    let args = ["lemma-suite", "--only", "order.transitivity", "--only", "s3.b.order_preservation", "--samples", "10"];
    let a = kpotent(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_kpotent"))
        .args(["lemma-suite", "--only", "order.transitivity", "--only", "s3.b.order_preservation"])
        .env("KPOTENT_SAMPLES", "10")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(strip(stdout(&a)), strip(stdout(&b)));
}

#[test]
fn lemma_suite_rejects_bad_config() {
    assert_eq!(kpotent(&["lemma-suite", "--p", "2"]).status.code(), Some(2));
    assert_eq!(kpotent(&["lemma-suite", "--mode", "sideways"]).status.code(), Some(2));
    assert_eq!(kpotent(&["lemma-suite", "--only", "no.such.lemma"]).status.code(), Some(2));
    assert_eq!(
        kpotent(&["lemma-suite", "--mode", "exhaustive", "--n", "4", "--p", "7"]).status.code(),
        Some(2)
    );
}
