use std::path::Path;
use std::process::{Command, Output};

fn laura(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_laura")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = r#"
seed = 5
frames = 2000
schemes = ["LAURA1", "LAURA2-CPR"]
n_coop = [1, 2]
[geometry]
n_relays = 3
ell_s1 = 0.9
[sweep]
points_db = [5.0, 15.0]
"#;

#[test]
fn sweep_writes_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    let out = laura(&["sweep", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("scheme,n_coop,gamma_sd_db,eta,eta_stderr,p_outage,p_mode_1,"));
    assert!(header.ends_with("p_mode_6,security_violations,reliability_violations"));
    assert_eq!(lines.count(), 8);
}

#[test]
fn sweep_output_is_reproducible_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(laura(&["sweep", &cfg, "--workers", "1", "-o", a.to_str().unwrap()]).status.success());
    assert!(laura(&["sweep", &cfg, "--workers", "3", "-o", b.to_str().unwrap()]).status.success());
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn audit_is_clean() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    let out = laura(&["audit", &cfg, "--frames", "1000"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("audit clean"));
}

#[test]
fn analyze_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "cp.toml",
        r#"
        frames = 20000
        schemes = ["LAURA1-CP"]
        [geometry]
        n_relays = 1
        ell_s1 = 0.9
        [sweep]
        points_db = [5.0]
        "#,
    );
    let out = laura(&["analyze", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("scheme,n_coop,gamma_sd_db,eta,p_outage,p_mode_1"));
    assert!(text.lines().nth(1).unwrap().starts_with("LAURA1-CP,1,5,"));

    let out = laura(&["compare", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[3], "upper_bound");
    let gap: f64 = row[7].parse().unwrap();
    assert!(gap.abs() < 0.1, "{text}");
}

#[test]
fn uncovered_analysis_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "n_coop = [3]\n[sweep]\npoints_db = [5.0]\n");
    let out = laura(&["analyze", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("analysis does not cover"));
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "frames = 0\n");
    assert_eq!(laura(&["sweep", &cfg]).status.code(), Some(2));
    let missing = dir.path().join("nope.toml");
    assert_eq!(laura(&["sweep", missing.to_str().unwrap()]).status.code(), Some(2));
    let cfg = write_config(dir.path(), "ok.toml", SMALL);
    assert_eq!(laura(&["sweep", &cfg, "--frames", "0"]).status.code(), Some(2));
    assert_eq!(laura(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn validate_small_sample() {
    let out = laura(&["validate", "--samples", "10"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("suite,check,worst,tolerance,cases,passed"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")), "{text}");
}
