use std::path::Path;
use std::process::Command;

use bessel_multipliers::cli::{columns, sidecar_path, Command as Sub};

const BIN: &str = env!("CARGO_BIN_EXE_besselmult");

fn run(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(BIN).args(args).output().unwrap();
    (out.status.code().unwrap(), out.stdout)
}

fn table_lines(bytes: &[u8]) -> Vec<String> {
    String::from_utf8(bytes.to_vec()).unwrap().lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
}

#[test]
fn cheap_subcommands_are_byte_identical() {
    let cases: [&[&str]; 8] = [
        &["gamma-check", "--bmax", "20"],
        &["bessel-check"],
        &["heat-check", "--alpha", "-0.5,2"],
        &["hankel-check", "--alpha", "1"],
        &["p2-check", "--alpha", "-0.5"],
        &["hormander-norm", "--b", "2,5", "--beta", "1", "--grid-scale", "0.25"],
        &["kernel-check", "--alpha", "0.5", "--b", "1,2"],
        &["lower-bound", "--theorem", "2", "--alpha", "1", "--b", "2,3,4.5,7,10", "--grid-scale", "0.5"],
    ];
    for args in cases {
        let mut full = args.to_vec();
        full.push("--no-timestamp");
        let (c1, a) = run(&full);
        let (c2, b) = run(&full);
        assert_eq!((c1, c2), (0, 0), "{args:?}");
        assert_eq!(a, b, "{args:?}");
        assert!(!String::from_utf8_lossy(&a).contains("# timestamp:"));
    }
}

#[test]
fn timestamp_is_present_unless_suppressed() {
    let (_, out) = run(&["gamma-check"]);
    assert!(String::from_utf8(out).unwrap().lines().any(|l| l.starts_with("# timestamp: ")));
}

#[test]
fn csv_schemas() {
    for (sub, args) in [
        (Sub::GammaCheck, vec!["gamma-check"]),
        (Sub::P2Check, vec!["p2-check", "--alpha", "-0.5,2", "--grid-scale", "0.4"]),
        (Sub::KernelCheck, vec!["kernel-check", "--b", "1"]),
        (Sub::LowerBound, vec!["lower-bound", "--theorem", "2", "--b", "2,3,4,5,6", "--grid-scale", "0.5"]),
    ] {
        let (code, out) = run(&args);
        assert_eq!(code, 0);
        let body = table_lines(&out).join("\n");
        let mut rdr = csv::Reader::from_reader(body.as_bytes());
        let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
        assert_eq!(header, columns(sub));
        let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        assert!(!rows.is_empty());
        assert!(rows.iter().all(|r| r.len() == header.len()));
    }
    assert_eq!(&columns(Sub::LowerBound)[..7], ["b", "norm", "term1_contrib", "term2_contrib", "remainder_contrib", "eps", "grid_pts"]);
    assert_eq!(columns(Sub::P2Check), ["N", "alpha", "R", "y", "ratio"]);
}

#[test]
fn numbers_carry_17_significant_digits() {
    let (_, out) = run(&["gamma-check", "--b", "3"]);
    let lines = table_lines(&out);
    let b = lines[1].split(',').next().unwrap();
    assert_eq!(b, "3.0000000000000000e0");
}

#[test]
fn json_output_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("kernel.json");
    let (code, _) = run(&["kernel-check", "--b", "1", "--format", "json", "--no-timestamp", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let rows: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let rows = rows.as_array().unwrap();
    assert!(!rows.is_empty());
    assert_eq!(rows[0].as_object().unwrap().len(), columns(Sub::KernelCheck).len());
    let meta_path = sidecar_path(&out);
    assert_eq!(meta_path, dir.path().join("kernel.meta.json"));
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(meta_path).unwrap()).unwrap();
    assert_eq!(meta["config"]["command"], "kernel-check");
    assert!(meta["summary"]["sup_ratio"]["alpha=0.5,b=1"].as_f64().unwrap().is_finite());
    assert!(meta.get("timestamp").is_none());
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    write(&cfg, r#"{"command": "gamma-check", "b": [1.0, 2.0], "no_timestamp": true}"#);
    let (code, out) = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(table_lines(&out).len(), 3);
    let (code, out) = run(&["--config", cfg.to_str().unwrap(), "--b", "5"]);
    assert_eq!(code, 0);
    let lines = table_lines(&out);
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("5.0000000000000000e0,"));

    write(&cfg, r#"{"command": "gamma-check", "colour": "blue"}"#);
    assert_eq!(run(&["--config", cfg.to_str().unwrap()]).0, 1);
    assert_eq!(run(&["--config", dir.path().join("missing.json").to_str().unwrap()]).0, 1);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&[]).0, 1);
    assert_eq!(run(&["heat-check", "--alpha", "-1"]).0, 1);
    assert_eq!(run(&["lower-bound", "--alpha", "0"]).0, 1);
    assert_eq!(run(&["lower-bound", "--theorem", "3"]).0, 1);
    assert_eq!(run(&["kernel-check", "--b", "20"]).0, 2);
    assert_eq!(run(&["lower-bound", "--b", "2,3,4,5,70"]).0, 2);
    assert_eq!(run(&["--help"]).0, 0);
    assert_eq!(run(&["--version"]).0, 0);
}
