use std::path::Path;
use std::process::{Command, Output};

fn gaugeflow(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaugeflow"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .unwrap()
}

#[test]
fn list_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let out = gaugeflow(&["--list-scenarios"], dir.path());
    assert!(out.status.success());
    let names: Vec<String> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(str::to_owned)
        .collect();
    assert_eq!(
        names,
        ["lorentz", "dirac_monopole", "wong_su2", "magnetized_kepler", "oscillator"]
    );
}

#[test]
fn integrate_writes_trajectory_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let out = gaugeflow(&["integrate", "--builtin", "lorentz"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("lorentz.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,q1,q2,q3,v1,v2,v3"));
    let last: Vec<f64> = csv
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|s| s.parse().unwrap())
        .collect();
    assert!((last[0] - 9.42477796076938).abs() < 1e-12);
    // three full gyrations return to the origin
    assert!(last[1].abs() < 1e-6 && last[2].abs() < 1e-6);
    let diag: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("lorentz_diagnostics.json")).unwrap(),
    )
    .unwrap();
    assert!(diag.is_object());
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        for mode in ["integrate", "crosscheck", "quantize", "verify-identities"] {
            let out = gaugeflow(&[mode, "--builtin", "dirac_monopole", "--seed", "7"], dir.path());
            assert!(out.status.code().is_some());
        }
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 4);
    for name in names {
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        assert!(x == y, "{name:?} differs");
    }
}

#[test]
fn config_file_and_builtin_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("osc.cfg");
    std::fs::write(&cfg, gaugeflow_core::scenario::builtin_text("oscillator").unwrap()).unwrap();
    let from_file = dir.path().join("file");
    let from_builtin = dir.path().join("builtin");
    std::fs::create_dir_all(&from_file).unwrap();
    std::fs::create_dir_all(&from_builtin).unwrap();
    assert!(gaugeflow(&["integrate", "--config", cfg.to_str().unwrap()], &from_file).status.success());
    assert!(gaugeflow(&["integrate", "--builtin", "oscillator"], &from_builtin).status.success());
    assert_eq!(
        std::fs::read(from_file.join("oscillator.csv")).unwrap(),
        std::fs::read(from_builtin.join("oscillator.csv")).unwrap()
    );
}

#[test]
fn unknown_builtin_and_missing_source() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(gaugeflow(&["integrate", "--builtin", "nope"], dir.path()).status.code(), Some(2));
    assert_eq!(gaugeflow(&["integrate"], dir.path()).status.code(), Some(2));
}
