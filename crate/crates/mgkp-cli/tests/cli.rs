//! End-to-end tests of the `mgkp` binary: exit-code contract,
//! byte-identical determinism, and output-file shapes.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mgkp"))
}

fn fresh_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mgkp-cli-test-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("failed to launch mgkp")
}

#[test]
fn unknown_flag_exits_2_and_writes_nothing() {
    let dir = fresh_dir("badflag");
    let out = run(&[
        "profile",
        "--sp",
        "preset:mkp",
        "--definitely-not-a-flag",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.exists(), "no output directory on argument errors");
}

#[test]
fn invalid_id_exits_2() {
    let dir = fresh_dir("badid");
    let out = run(&[
        "conservation-check",
        "--id",
        "99",
        "--sp",
        "preset:mkp",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn inadmissible_frame_exits_3() {
    let dir = fresh_dir("inadm");
    // defocussing with tiny transverse coupling: Delta < 0 at this frame
    let out = run(&[
        "profile",
        "--sp",
        "preset:mkp",
        "--mu",
        "0.5",
        "--nu",
        "2",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn conservation_check_mkp_prints_all_fifteen_rows() {
    let dir = fresh_dir("cons15");
    let out = run(&[
        "conservation-check",
        "--all",
        "--sp",
        "preset:mkp",
        "--fields",
        "3",
        "--points",
        "2",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    for id in 1..=15 {
        assert!(
            stdout.contains(&format!("id {id:>2}")),
            "missing row for id {id} in:\n{stdout}"
        );
    }
    assert!(stdout.contains("skipped"), "inapplicable ids must be reported");
    assert!(stdout.contains("quarantined"), "corrected-flux ids must be flagged");
    assert!(dir.join("conservation_report.json").exists());
    assert!(dir.join("manifest.json").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let d1 = fresh_dir("det1");
    let d2 = fresh_dir("det2");
    for d in [&d1, &d2] {
        let out = run(&[
            "conservation-check",
            "--all",
            "--sp",
            "preset:mkp",
            "--fields",
            "2",
            "--points",
            "2",
            "--seed",
            "42",
            "--out-dir",
            d.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let a = fs::read(d1.join("conservation_report.json")).unwrap();
    let b = fs::read(d2.join("conservation_report.json")).unwrap();
    assert_eq!(a, b, "same seed and arguments must give identical bytes");
}

#[test]
fn profile_csv_has_header_and_full_precision_floats() {
    let dir = fresh_dir("profcsv");
    let out = run(&[
        "profile",
        "--sp",
        "preset:mkp",
        "--h",
        "1.5",
        "--w",
        "0.5",
        "--samples",
        "101",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.join("profile.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("xi,u"));
    let first = lines.next().unwrap();
    let cells: Vec<&str> = first.split(',').collect();
    assert_eq!(cells.len(), 2);
    for c in cells {
        let v: f64 = c.parse().unwrap();
        assert!(v.is_finite());
        assert!(c.contains('e'), "fixed scientific format expected, got `{c}`");
    }
    assert_eq!(csv.lines().count(), 102);
    assert!(dir.join("metadata.json").exists());
}

#[test]
fn kinematics_case_emits_region_and_boundaries() {
    let dir = fresh_dir("kin");
    let out = run(&[
        "kinematics",
        "--case",
        "defocus-normal",
        "--k2",
        "0.333",
        "--resolution",
        "20,20",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let region = fs::read_to_string(dir.join("region.csv")).unwrap();
    assert!(region.starts_with("c,theta,admissible,kinds\n"));
    assert_eq!(region.lines().count(), 1 + 20 * 20);
    assert!(region.lines().any(|l| l.contains(",1,")), "region must contain admissible cells");
    assert!(dir.join("boundaries.csv").exists());
    // defocussing: the shock curve file must exist too
    assert!(dir.join("shock_curve.csv").exists());
}

#[test]
fn evolve_writes_trace_snapshots_and_manifest() {
    let dir = fresh_dir("evo");
    let out = run(&[
        "evolve",
        "--sp",
        "1,1,0,0,1",
        "--grid",
        "64,16,32,8",
        "--dt",
        "0.001",
        "--t-end",
        "0.02",
        "--ic",
        "soliton",
        "--mu",
        "0",
        "--nu",
        "1",
        "--snap-every",
        "10",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("trace.json").exists());
    assert!(dir.join("snap_0000.bin").exists());
    assert!(dir.join("snap_0000.json").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    let outputs = manifest["outputs"].as_array().unwrap();
    assert!(outputs.iter().any(|o| o == "trace.json"));
    assert!(outputs.iter().any(|o| o == "evolve_report.json"));
    // sidecar carries the grid in the documented field names
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("snap_0000.json")).unwrap()).unwrap();
    assert_eq!(sidecar["Nx"], 64);
    assert_eq!(sidecar["Ny"], 16);
    let bin = fs::read(dir.join("snap_0000.bin")).unwrap();
    assert_eq!(bin.len(), 64 * 16 * 8);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = fresh_dir("cfg");
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, "# defaults\nsp = preset:mkp\n").unwrap();
    let out = run(&[
        "conservation-check",
        "--id",
        "1",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        dir.join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn normalize_reports_scaled_parameters() {
    let dir = fresh_dir("norm");
    let out = run(&[
        "normalize",
        "--alpha",
        "2",
        "--epsilon",
        "-1",
        "--kappa",
        "1",
        "--beta",
        "0.5",
        "--gamma",
        "-3",
        "--p",
        "2",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("normalized.json")).unwrap()).unwrap();
    assert_eq!(v["scaled"]["sigma1"].as_i64().unwrap().abs(), 1);
    assert_eq!(v["scaled"]["sigma2"].as_i64().unwrap().abs(), 1);
}
