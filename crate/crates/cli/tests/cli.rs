use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fiberphase"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str], config: &Path) -> Output {
    bin().args(args).arg("--config").arg(config).output().unwrap()
}

const HELIX: &str = r#"{"path":{"type":"helix","radius":1,"pitch":1,"turns":1},"wavenumber_k":100,"n_samples":512,"oracle_steps":8192}"#;

#[test]
fn simulate_writes_deterministic_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "helix.json", HELIX);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = bin().args(["simulate", "--format", "csv", "--out"]).arg(out).arg("--config").arg(&cfg).output().unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let first = fs::read(a.join("simulate.csv")).unwrap();
    assert_eq!(first, fs::read(b.join("simulate.csv")).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("t,khat_x,khat_y,khat_z,lambda,gamma,dPhi_dt,Phi,"));
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 513);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "helix.json", HELIX);
    let one = bin().env("FIBERPHASE_THREADS", "1").args(["simulate", "--config"]).arg(&cfg).output().unwrap();
    let four = bin().env("FIBERPHASE_THREADS", "4").args(["simulate", "--config"]).arg(&cfg).output().unwrap();
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn json_output_parses() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "helix.json", HELIX);
    let o = run(&["simulate", "--format", "json"], &cfg);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["columns"].as_array().unwrap().len(), 15);
    assert_eq!(v["rows"].as_array().unwrap().len(), 512);
}

#[test]
fn verify_passes_with_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "helix.json", HELIX);
    let o = run(&["verify"], &cfg);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("name,residual,bound,pass\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn verify_failure_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    // A coarse oracle cannot meet a 1e-12 equivalence bound.
    let text = HELIX.replace("\"oracle_steps\":8192", "\"oracle_steps\":64,\"tolerances\":{\"oracle\":1e-12}");
    let cfg = write_config(dir.path(), "strict.json", &text);
    let o = run(&["verify"], &cfg);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stdout).contains("oracle_equivalence"));
}

#[test]
fn unknown_key_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", &HELIX.replace("\"n_samples\"", "\"n_sample\""));
    let o = run(&["simulate"], &cfg);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(o.stderr.trim_ascii()).unwrap();
    assert_eq!(err["error"], "config");
}

#[test]
fn missing_config_file_exits_two() {
    let o = bin().args(["simulate", "--config", "/nonexistent/cfg.json"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn south_pole_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    // A half-turn arc reverses the tangent, driving λ to π.
    let cfg = write_config(
        dir.path(),
        "pole.json",
        r#"{"path":{"type":"segments","segments":[{"kind":"arc","radius":1,"angle":3.141592653589793}]},"wavenumber_k":10,"n_samples":257}"#,
    );
    for cmd in ["simulate", "verify"] {
        let o = run(&[cmd], &cfg);
        assert_eq!(o.status.code(), Some(3), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        let err: serde_json::Value = serde_json::from_slice(o.stderr.trim_ascii()).unwrap();
        assert_eq!(err["error"], "south_pole");
    }
}

#[test]
fn scan_writes_table_and_crossings() {
    let dir = tempfile::tempdir().unwrap();
    let text = HELIX.replace(
        "\"n_samples\":512",
        r#""n_samples":512,"scan":{"kind":"rate","gamma_dot_over_k":[0,1,1e2,1e4,1e6],"lambda":[0.01]}"#,
    );
    let cfg = write_config(dir.path(), "scan.json", &text);
    let out = dir.path().join("out");
    let o = bin().args(["scan", "--out"]).arg(&out).arg("--config").arg(&cfg).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let scan = fs::read_to_string(out.join("scan.csv")).unwrap();
    let mut lines = scan.lines();
    assert_eq!(
        lines.next().unwrap(),
        "gamma_dot_over_k,lambda,zeta,expectation_plus,expectation_minus,inverted_plus,inverted_minus"
    );
    let rows: Vec<&str> = lines.collect();
    assert!(rows[0].ends_with("false,false"));
    assert!(rows[4].ends_with("true,true"));
    let crossings = fs::read_to_string(out.join("scan_crossings.csv")).unwrap();
    assert_eq!(crossings.lines().count(), 2);
}

#[test]
fn scan_without_grid_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "helix.json", HELIX);
    assert_eq!(run(&["scan"], &cfg).status.code(), Some(2));
}

#[test]
fn bad_thread_count_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "helix.json", HELIX);
    let o = bin().env("FIBERPHASE_THREADS", "zero").args(["simulate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
