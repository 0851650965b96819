use std::path::Path;
use std::process::{Command, Output};

fn kbl(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kbl"))
        .arg("--out")
        .arg(dir.join("out"))
        .args(args)
        .output()
        .unwrap()
}

fn config(dir: &Path, text: &str) -> String {
    let p = dir.join("cfg.json");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn stochastic_commands_need_a_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let out = kbl(tmp.path(), &["duality"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
}

#[test]
fn bad_json_reports_path_and_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "{\n  \"random\": 3,\n  oops\n}");
    let out = kbl(tmp.path(), &["--seed", "1", "--config", &cfg, "duality"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("cfg.json") && err.contains("line 3"), "{err}");
    let unknown = config(tmp.path(), r#"{"randum": 3}"#);
    assert_eq!(kbl(tmp.path(), &["--seed", "1", "--config", &unknown, "duality"]).status.code(), Some(2));
}

#[test]
fn proptest_gate_can_fail_and_pass_vacuously() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = config(tmp.path(), r#"{"budget": 2, "inject_bad_tolerance": true}"#);
    assert_eq!(kbl(tmp.path(), &["--seed", "1", "--config", &bad, "proptest"]).status.code(), Some(1));
    let none = config(tmp.path(), r#"{"budget": 0}"#);
    let out = kbl(tmp.path(), &["--seed", "1", "--config", &none, "proptest"]);
    assert_eq!(out.status.code(), Some(0));
    let summary = std::fs::read_to_string(tmp.path().join("out/summary.json")).unwrap();
    assert!(summary.contains("\"passed\": true"));
}

#[test]
fn kakeya_reads_family_files() {
    let tmp = tempfile::tempdir().unwrap();
    let h = r#"{"k": 1, "members": [{"point": [0, 0.5], "basis": [[1, 0]]}, {"point": [0, -0.5], "basis": [[1, 0]]}]}"#;
    let v = r#"{"k": 1, "members": [{"point": [0.5, 0], "basis": [[0, 1]]}]}"#;
    std::fs::write(tmp.path().join("h.json"), h).unwrap();
    std::fs::write(tmp.path().join("v.json"), v).unwrap();
    let cfg = config(tmp.path(), r#"{"families": ["h.json", "v.json"], "radius": 3, "sweep_sizes": []}"#);
    let out = kbl(tmp.path(), &["--seed", "1", "--config", &cfg, "kakeya"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("out/report_lw.csv")).unwrap();
    assert!(csv.starts_with("cube,incident_1,incident_2,term,cumulative\n"));
    // Two crossings at right angles; p = 1 so rhs = 2 * 1.
    assert!(csv.contains("lhs=2.000000000000e0 rhs=2.000000000000e0"), "{csv}");
    let empty = r#"{"k": 1, "members": []}"#;
    std::fs::write(tmp.path().join("e.json"), empty).unwrap();
    let cfg = config(tmp.path(), r#"{"families": ["h.json", "e.json"], "radius": 3, "sweep_sizes": [], "fremlin": false}"#);
    let out = kbl(tmp.path(), &["--seed", "1", "--config", &cfg, "kakeya"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(tmp.path().join("out/report_lw.csv")).unwrap();
    assert!(csv.contains("lhs=0.000000000000e0"), "{csv}");
}
