use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_g2coflow"))
        .args(args)
        .current_dir(dir)
        .env_remove("G2COFLOW_TOL")
        .output()
        .expect("spawn g2coflow")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write_bracket(dir: &Path, name: &str, a: [[f64; 6]; 6]) {
    let v = serde_json::json!({ "A": a });
    std::fs::write(dir.join(name), v.to_string()).unwrap();
}

fn planar_1_0() -> [[f64; 6]; 6] {
    let mut a = [[0.0; 6]; 6];
    a[0][1] = 1.0;
    a[4][3] = -1.0;
    a
}

#[test]
fn verify_appendix_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["verify", "--suite", "appendix"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["pass"], true);
    let names: Vec<String> = v["suites"][0]["report"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect();
    assert!(names.iter().any(|n| n.contains("42")), "{names:?}");
    assert!(names.iter().any(|n| n.contains("168")), "{names:?}");
}

#[test]
fn verify_laplacian_and_bianchi_write_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--convention", "example", "verify", "--suite", "laplacian", "--samples", "10", "--out", "r.json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(v["suites"].as_array().unwrap().len(), 1);
    let o = run(dir.path(), &["verify", "--suite", "bianchi", "--samples", "5"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn tolerance_knobs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--tol", "1e-30", "verify", "--suite", "torsion", "--samples", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_g2coflow"))
        .args(["verify", "--suite", "torsion", "--samples", "3"])
        .env("G2COFLOW_TOL", "1e-30")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_g2coflow"))
        .args(["verify", "--suite", "torsion"])
        .env("G2COFLOW_TOL", "loose")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_arguments() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["--convention", "nope", "verify"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["flow", "--bracket", "missing.json"]).status.code(), Some(2));
}

#[test]
fn flow_planar_with_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    write_bracket(dir.path(), "p.json", planar_1_0());
    let o = run(dir.path(), &["--convention", "example", "flow", "--bracket", "p.json", "--t-end", "50"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert!(v["planarClosedForm"]["maxRelativeError"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["scalarBound"]["pass"], true);
    let csv = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(csv.starts_with("t,A11,"));
    assert!(csv.lines().next().unwrap().ends_with("normSq,R,torsionNormSq,step"));
    let meta: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("trace.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["termination"]["reason"], "completed");
    assert_eq!(meta["options"]["relTol"], 1e-9);
}

#[test]
fn flow_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    write_bracket(dir.path(), "p.json", planar_1_0());
    for out in ["a.csv", "b.csv"] {
        let o = run(dir.path(), &["--convention", "example", "flow", "--bracket", "p.json", "--t-end", "3", "--out", out]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(dir.path().join("a.csv")).unwrap(), std::fs::read(dir.path().join("b.csv")).unwrap());
}

#[test]
fn flow_rejects_non_symplectic() {
    let dir = tempfile::tempdir().unwrap();
    write_bracket(dir.path(), "p.json", planar_1_0());
    // diag(B, -B^t) is not in sp(6) for the section-4 form
    let o = run(dir.path(), &["--convention", "section4", "flow", "--bracket", "p.json"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn flow_backward_to_ceiling() {
    let dir = tempfile::tempdir().unwrap();
    write_bracket(dir.path(), "p.json", planar_1_0());
    let o = run(
        dir.path(),
        &["--convention", "example", "flow", "--bracket", "p.json", "--backward", "--t-end", "-1", "--norm-ceiling", "100"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    // x(t) = (1 + 3t)^{-1/2} blows up at t = -1/3
    assert_eq!(v["termination"]["reason"], "normCeiling");
}

#[test]
fn soliton_example() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["soliton", "check", "--example", "nilpotent3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert!((v["report"]["c"].as_f64().unwrap() + 2.5).abs() < 1e-12);
    assert_eq!(v["report"]["classification"], "expanding");
    assert_eq!(v["report"]["kind"], "semi_algebraic");
    assert_eq!(v["algebraic"], false);
}

#[test]
fn soliton_skew_sweep_and_generic() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--jobs", "2", "soliton", "check", "--skew-sweep", "40"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["algebraic"], 40);

    let g2 = g2coflow::g2core::canonical_g2(g2coflow::g2core::Convention::Section4);
    let m = g2coflow::sampling::random_sp(&mut g2coflow::sampling::rng(3), &g2, 1.0);
    write_bracket(dir.path(), "r.json", std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)])));
    let o = run(dir.path(), &["soliton", "check", "--bracket", "r.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["report"]["kind"], "none");
}

#[test]
fn phase_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["phase", "--res", "5", "--trajectory", "1,2", "--t-end", "1", "--nullclines"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["points"], 25);
    assert_eq!(v["equilibria"], 5);
    assert!((v["embedding"]["factor"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    let points = std::fs::read_to_string(dir.path().join("phase/points.csv")).unwrap();
    assert_eq!(points.lines().count(), 26);
    assert!(points.starts_with("x,y,dx,dy,V,Vdot,H_defined,logAbsH,flags"));
    assert!(dir.path().join("phase/trajectory_0.csv").exists());
    let nl = std::fs::read_to_string(dir.path().join("phase/nullclines.csv")).unwrap();
    assert_eq!(nl.lines().count(), 7);
    assert!(String::from_utf8_lossy(&o.stderr).contains("H relative drift"));
}
