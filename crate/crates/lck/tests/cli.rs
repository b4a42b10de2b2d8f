use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn lck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lck"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config_file(json: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(json.as_bytes()).unwrap();
    f
}

#[test]
fn standard_case_passes_and_echoes_lambda() {
    let out = lck(&["run", "--points", "12", "--suites", "lck,theorem_a"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["config", "suites", "overall_pass", "elapsed_ms"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["overall_pass"], true);
    assert!(v["elapsed_ms"].is_null());
    let lambda = v["config"]["lambda"].as_array().unwrap();
    for l in lambda {
        assert!((l[0].as_f64().unwrap() - 0.5).abs() < 1e-15);
        assert!(l[1].as_f64().unwrap().abs() < 1e-15);
    }
    let suites = v["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 2);
    for check in suites[0]["checks"].as_array().unwrap() {
        for key in ["name", "max_residual", "tolerance", "points", "pass"] {
            assert!(check.get(key).is_some(), "missing {key}");
        }
    }
}

#[test]
fn config_file_with_flag_overrides() {
    let f = config_file(r#"{"n": 3, "a": [1, 2, 5], "c": ["1", "0.6+0.8i", [0, 1]], "points": 8, "suites": ["lck", "parallel_lee"]}"#);
    let out = lck(&["run", "--config", f.path().to_str().unwrap(), "--seed", "4", "--format", "text", "--timing"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("a = [1.0, 2.0, 5.0]"));
    assert!(text.contains("seed = 4"));
    assert!(text.lines().any(|l| l.contains("lee_form_parallel") && l.ends_with("PASS")));
    assert!(text.trim_end().ends_with("overall: PASS"));
}

#[test]
fn check_failure_exits_one() {
    let f = config_file(r#"{"suites": ["lck"], "points": 4, "tol_overrides": {"lck_condition": 0.0}}"#);
    let out = lck(&["run", "--config", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["overall_pass"], false);
}

#[test]
fn unsorted_weights_are_a_config_error() {
    let out = lck(&["run", "--a", "2,1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("sorted"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn other_config_errors_exit_two() {
    for args in [
        vec!["run", "--suites", "everything"],
        vec!["run", "--n", "6"],
        vec!["run", "--c", "1,2+"],
        vec!["run", "--s", "-1"],
        vec!["run", "--points", "0"],
        vec!["run", "--format", "yaml"],
        vec!["run", "--config", "/nonexistent/lck.json"],
        vec!["run", "--bogus"],
    ] {
        assert_eq!(lck(&args).status.code(), Some(2), "{args:?}");
    }
    let f = config_file(r#"{"n": 2, "colour": "blue"}"#);
    assert_eq!(lck(&["run", "--config", f.path().to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical_across_runs_and_threads() {
    let args = ["run", "--a", "1,2", "--points", "10", "--seed", "17", "--suites", "group_actions,lcr"];
    let one = lck(&args);
    let two = lck(&args);
    let mut threaded: Vec<&str> = args.to_vec();
    threaded.extend(["--parallel", "4"]);
    let three = lck(&threaded);
    assert_eq!(one.stdout, two.stdout);
    assert_eq!(one.stdout, three.stdout);
}

#[test]
fn demo_prints_spectrum_and_all_suites() {
    let out = lck(&["demo"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("Λ spectrum: [0.500000+0.000000i, 0.500000+0.000000i]"));
    for suite in lck::report::SUITES {
        assert!(text.contains(&format!("[{suite}]")), "{suite}");
    }
}
