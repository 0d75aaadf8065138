use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn privcode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_privcode"))
        .args(args)
        .env_remove("PRIVCODE_ATOM_BUDGET")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

const COPY: &str = r#"{"x_labels":["a","b"],"y_labels":["0","1"],"pmf":[[0.5,0.0],[0.0,0.5]]}"#;

const GRID: &str = r#"{"x_labels":["00","01","10","11"],"y_labels":["0","1"],
    "pmf":[[0.3,0.1],[0.0,0.0],[0.0,0.0],[0.2,0.4]]}"#;

#[test]
fn bounds_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let dist = write(dir.path(), "copy.json", COPY);
    let d = dist.to_str().unwrap();

    let out = privcode(&["bounds", "--dist", d, "--eps", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["bounds"]["upper"]["thm1"]["eq12"]["value"], 3.5);

    let out = privcode(&["bounds", "--dist", d, "--eps", "0.5", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("eps,"));
    assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
}

#[test]
fn codec_schemes_pass() {
    let dir = tempfile::tempdir().unwrap();
    let copy = write(dir.path(), "copy.json", COPY);
    let grid = write(dir.path(), "grid.json", GRID);

    let out = privcode(&[
        "codec",
        "--dist",
        copy.to_str().unwrap(),
        "--scheme",
        "eps",
        "--eps",
        "0.5",
        "--seed",
        "7",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = json(&out);
    let leak = r["audit"]["exact_leakage"].as_f64().unwrap();
    assert!((leak - 0.5).abs() < 1e-9);
    let el = r["audit"]["expected_length"].as_f64().unwrap();
    assert!((0.5..=3.5).contains(&el));

    for umode in ["huffman", "fixed"] {
        let out = privcode(&[
            "codec",
            "--dist",
            grid.to_str().unwrap(),
            "--scheme",
            "functional",
            "--umode",
            umode,
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(json(&out)["audit"]["exact_leakage"].as_f64().unwrap() <= 1e-9);
    }
}

#[test]
fn split_below_threshold_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let grid = write(dir.path(), "grid.json", GRID);
    let sep = write(
        dir.path(),
        "sep.json",
        r#"{"rows":[["00","01"],["10","11"]]}"#,
    );
    let out = privcode(&[
        "codec",
        "--dist",
        grid.to_str().unwrap(),
        "--scheme",
        "split",
        "--sep",
        sep.to_str().unwrap(),
        "--eps",
        "0.0",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("below the required"));
}

#[test]
fn malformed_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"pmf\": [[0.5, 0.6");
    let out = privcode(&["bounds", "--dist", bad.to_str().unwrap(), "--eps", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("ParseError") || err.contains("parse"), "{err}");

    let heavy = write(
        dir.path(),
        "heavy.json",
        r#"{"x_labels":["a"],"y_labels":["0","1"],"pmf":[[0.5,0.6]]}"#,
    );
    let out = privcode(&["bounds", "--dist", heavy.to_str().unwrap(), "--eps", "0"]);
    assert_eq!(out.status.code(), Some(1));

    let missing = dir.path().join("nope.json");
    let out = privcode(&["bounds", "--dist", missing.to_str().unwrap(), "--eps", "0"]);
    assert_eq!(out.status.code(), Some(1));

    let out = privcode(&["bounds"]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn examples_pass() {
    let out = privcode(&["example1", "--n", "6", "--eps", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let out = privcode(&["example2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert!((r["results"]["h_x1"].as_f64().unwrap() - 0.4025).abs() < 1e-4);
    assert!(r["notes"].to_string().contains("15.45"));

    let out = privcode(&["example1", "--n", "17", "--eps", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn selftest_is_deterministic() {
    let a = privcode(&["selftest", "--seed", "3", "--trials", "20"]);
    let b = privcode(&["selftest", "--seed", "3", "--trials", "20"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn injected_fault_fails_selftest() {
    let out = privcode(&[
        "selftest",
        "--seed",
        "0",
        "--trials",
        "20",
        "--inject",
        "broken-huffman",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL coding."));
}

#[test]
fn codec_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let copy = write(dir.path(), "copy.json", COPY);
    let run = || {
        privcode(&[
            "codec",
            "--dist",
            copy.to_str().unwrap(),
            "--scheme",
            "eps",
            "--eps",
            "0.3",
            "--seed",
            "11",
        ])
        .stdout
    };
    assert_eq!(run(), run());
}

#[test]
fn timing_flag_adds_wall_clock() {
    let out = privcode(&["--timing", "example2"]);
    assert!(json(&out)["wall_clock_ms"].as_f64().is_some());
    let out = privcode(&["example2"]);
    assert!(json(&out).get("wall_clock_ms").is_none());
}
