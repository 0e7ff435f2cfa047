use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn subdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subdiff"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const FIG: &str = r#"
problem = "example1"
alpha = 0.4
method = "coll2"
tol = [1e-2, 1e-3]
lambda = 9.869604401089358
check_bounds = true
"#;

#[test]
fn run_writes_outputs_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), FIG);
    let out = dir.path().join("out");
    let o = subdiff(&["run", &cfg, "--out", out.to_str().unwrap(), "--threads", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("bound ok"), "{stdout}");
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["runs"].as_array().unwrap().len(), 2);
    assert!(out.join("convergence.csv").exists());
}

#[test]
fn sweep_covers_alpha_and_methods() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
alphas = [0.3, 0.6]
methods = ["l1", "coll2"]
tol = [1e-2]
"#,
    );
    let out = dir.path().join("out");
    let o = subdiff(&["sweep", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["runs"].as_array().unwrap().len(), 4);
}

#[test]
fn verify_bounds_on_stored_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), FIG);
    let out = dir.path().join("out");
    assert!(subdiff(&["run", &cfg, "--out", out.to_str().unwrap()]).status.success());
    let report = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.join("report.json").exists())
        .unwrap()
        .join("report.json");
    let o = subdiff(&["verify-bounds", report.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(report.parent().unwrap().join("bounds.csv").exists());
}

#[test]
fn bad_config_exits_with_error_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "alpha = 0.4\nunknown_key = 1\n");
    let o = subdiff(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn failed_run_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "alpha = 0.01\nmethod = \"l1\"\ntol = [1e-6]\nlambda = 9.869604401089358\n");
    let o = subdiff(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("underflow"));
}
