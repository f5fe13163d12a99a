use std::path::PathBuf;
use std::process::{Command, Output};

fn fiberforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fiberforge"))
        .args(args)
        .env_remove("FIBERFORGE_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

#[test]
fn verify_moves_reports_singletons() {
    let o = fiberforge(&["verify", "moves"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("sparse partitions found: 1 (singletons)"));
}

#[test]
fn verify_polytope_and_coloring() {
    for target in ["polytope", "coloring"] {
        let o = fiberforge(&["verify", target]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        assert!(!stdout(&o).contains("FAIL"));
    }
}

#[test]
fn certify_n5_and_emit_collapses() {
    let dir = tempfile::tempdir().unwrap();
    let certs = dir.path().join("certs.json");
    let o = fiberforge(&["certify-fibration", "--space", "n5", "--emit-collapses", certs.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("report Certified"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(certs).unwrap()).unwrap();
    assert!(!v["certificates"].as_array().unwrap().is_empty());
}

#[test]
fn fiber_roundtrip_through_homology() {
    let dir = tempfile::tempdir().unwrap();
    let tri = dir.path().join("fiber_n5.tri4");
    let o = fiberforge(&["build-fiber", "--space", "n5", "--out", tri.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&tri).unwrap().starts_with("tri4 144 4"));
    let json = dir.path().join("h.json");
    let o = fiberforge(&["homology", "--input", tri.to_str().unwrap(), "--truncate", "--json", json.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("H1 = Z4 + Z4 + Z4 + Z4"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    let h1 = &v["suites"][0]["checks"][0]["computed"]["homology"][1];
    assert_eq!(h1["torsion"], serde_json::json!([4, 4, 4, 4]));
}

#[test]
fn homology_over_a_field() {
    let dir = tempfile::tempdir().unwrap();
    let tri = dir.path().join("f.tri4");
    fiberforge(&["build-fiber", "--complex", "n5", "--out", tri.to_str().unwrap()]);
    let o = fiberforge(&["homology", "--input", tri.to_str().unwrap(), "--truncate", "--field", "0"]);
    assert!(stdout(&o).contains(r#""betti":[1,0,4,4,0]"#), "{}", stdout(&o));
}

#[test]
fn abelianize_and_table() {
    let o = fiberforge(&["abelianize", "--presentation", data("fiber_n5_pi1.txt").to_str().unwrap()]);
    assert!(stdout(&o).contains("abelianization = Z4 + Z4 + Z4 + Z4"));
    let o = fiberforge(&["assemble-n5", "--table", data("n5_pairing.csv").to_str().unwrap(), "--compare-gamma0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS isomorphic to the quotient: true"));
}

#[test]
fn malformed_table_names_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    let text = std::fs::read_to_string(data("n5_pairing.csv")).unwrap();
    std::fs::write(&bad, text.replacen("A,--+--,I,A,+-+-+,24135", "A,--+--,I,A,+-+-+,2413", 1)).unwrap();
    let o = fiberforge(&["assemble-n5", "--table", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 3"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unknown_flags_are_rejected() {
    let o = fiberforge(&["report", "--bogus"]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn report_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let o = fiberforge(&["report", "--json", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    fiberforge(&["--seed", "0", "report", "--json", b.to_str().unwrap()]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert!(stdout(&o).contains("SKIPPED betti-m5"));
}
