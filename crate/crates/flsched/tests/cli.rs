//! Exit-code and output contract checks for the command-line front end.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_flsched"))
}

#[test]
fn rates_succeeds_and_embeds_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["rates", "--seed", "9"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("rates_theta.csv")).unwrap();
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("# config_hash="), "{first}");
    assert!(first.contains("master_seed=9"), "{first}");
    // One row per (policy, grid point): default 3 policies + NS overlay, 9 θ.
    assert_eq!(text.lines().count() - 2, 4 * 9);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    for d in [&d1, &d2] {
        let out = bin()
            .args(["rates", "--seed", "3"])
            .arg("--out")
            .arg(d.path())
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let a = std::fs::read(d1.path().join("rates_theta.csv")).unwrap();
    let b = std::fs::read(d2.path().join("rates_theta.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"beta": 3.0}"#).unwrap();
    let out = bin()
        .args(["rates"])
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // Unknown flag / bad usage also exits 1.
    let out = bin().args(["rates", "--frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    // Missing config file.
    let out = bin()
        .args(["rates", "--config", "/nonexistent/cfg.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn runtime_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    // Plot on a missing input file is a runtime (I/O) failure.
    let out = bin()
        .args(["plot", "/nonexistent/input.csv"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn plot_renders_svg_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("series.csv");
    std::fs::write(&csv, "# config_hash=x master_seed=0\nx,a,b\n1,2.0,3.0\n2,2.5,1.0\n3,4.0,NONCONV\n").unwrap();
    let out = bin()
        .arg("plot")
        .arg(&csv)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(dir.path().join("series.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
}
