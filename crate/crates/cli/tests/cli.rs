use std::path::PathBuf;
use std::process::Command;

fn qtors(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_qtors")).args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("qtors-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn torsion_bound_x1_13() {
    assert_eq!(qtors(&["torsionbound", "--curve", "X1_13", "--primes", "3,5"]).trim(), "Z/19");
}

#[test]
fn localtest_passes_known_twist() {
    let s = qtors(&["localtest", "--curve", "X1_13", "--d", "673"]);
    assert!(s.contains("congruence: Pass") && s.contains("els: Pass"), "{s}");
}

#[test]
fn lvalue_is_json() {
    let s = qtors(&["lvalue", "--curve", "X1_11", "--d", "5"]);
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert_eq!(v["analytic_rank"], "zero");
}

#[test]
fn scan_classify_report() {
    let dir = scratch("scan");
    let out = dir.to_str().unwrap();
    qtors(&["scan", "--curve", "X1_13", "--dmax", "500", "--height", "300", "--out", out]);
    let db = dir.join("records.jsonl");
    let db = db.to_str().unwrap();
    let row = qtors(&["classify", "--d", "17", "--db", db]);
    assert!(row.lines().any(|l| l.starts_with("Z/13") && l.contains("present")), "{row}");
    qtors(&["report", "--db", db, "--bound", "500", "--cutoff", "1000", "--out", out]);
    let csv = std::fs::read_to_string(dir.join("growth.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("label,B,count,ratio,kappa_prediction"));
    assert!(csv.lines().any(|l| l.starts_with("X1_13,500,5,")), "{csv}");
    let _ = std::fs::remove_dir_all(&dir);
}
