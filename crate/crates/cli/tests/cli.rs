use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn stefan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stefan")).args(args).output().unwrap()
}

fn result_value(report: &str, key: &str) -> String {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing from report"))
        .to_string()
}

#[test]
fn solve_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("demo.cfg");
    let out = stefan(&["solve", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["profiles.csv", "snapshot.csv", "report.txt"] {
        assert!(dir.path().join(f).exists(), "{f} not written");
    }
    let report = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    let stefan_res: f64 = result_value(&report, "bc.stefan").parse().unwrap();
    assert!(stefan_res < 1e-6, "stefan residual {stefan_res}");
    let profiles = fs::read_to_string(dir.path().join("profiles.csv")).unwrap();
    assert!(profiles.lines().count() > 10);
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "[physical]\nP = not-a-number\n").unwrap();
    let out = stefan(&["solve", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let missing = stefan(&["check", "--config", dir.path().join("none.cfg").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn invalid_override_exits_2() {
    let cfg = configs().join("demo.cfg");
    let out = stefan(&["check", "--config", cfg.to_str().unwrap(), "--tol", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_below_ignition_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("demo.cfg")).unwrap().replace("P = 17.76", "P = 1.0");
    let cfg = dir.path().join("cold.cfg");
    fs::write(&cfg, text).unwrap();
    let out = stefan(&["check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ignition"));
}

#[test]
fn check_passes_on_shipped_configs() {
    for name in ["demo.cfg", "affine.cfg", "joule.cfg", "solid_joule.cfg"] {
        let cfg = configs().join(name);
        let out = stefan(&["check", "--config", cfg.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn oracle_on_coarse_grid_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("affine.cfg");
    let out = stefan(&[
        "oracle",
        "--config",
        cfg.to_str().unwrap(),
        "--grid",
        "9",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_agrees_at_default_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("joule.cfg");
    let out = stefan(&["oracle", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sweep_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("demo.cfg");
    let out = stefan(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--param",
        "P",
        "--lo",
        "16",
        "--hi",
        "20",
        "--count",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<Vec<&str>> = table.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    let alpha: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(alpha.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn unknown_sweep_parameter_exits_2() {
    let cfg = configs().join("demo.cfg");
    let out = stefan(&["sweep", "--config", cfg.to_str().unwrap(), "--param", "nope", "--lo", "1", "--hi", "2"]);
    assert_eq!(out.status.code(), Some(2));
}
