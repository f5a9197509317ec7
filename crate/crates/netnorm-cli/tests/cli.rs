//! End-to-end CLI tests: exit codes, report shape, the documented example
//! values, and byte-identical reports across worker counts on the sample
//! instance set.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_netnorm")
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn validate_good_and_bad() {
    let out = run(&["validate", data("locc_mixed.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["valid"], serde_json::Value::Bool(true));

    let out = run(&["validate", data("bad_locc.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["valid"], serde_json::Value::Bool(false));
    assert!(doc["violations"]
        .as_array()
        .unwrap()
        .iter()
        .any(|v| v["rule"] == "ΣX ⪯ I"));
}

#[test]
fn malformed_file_is_exit_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\"kind\": \"locc\", \"d1\": }").unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "diagnostics missing location: {err}");
}

#[test]
fn hsep_trivial_instance_reports_one() {
    let out = run(&[
        "hsep",
        "--delta",
        "0.5",
        data("locc_single.json").to_str().unwrap(),
    ]);
    let doc = stdout_json(&out);
    let value = doc["report"]["value"].as_f64().unwrap();
    assert!((value - 1.0).abs() < 1e-6, "value {value}");
    assert_eq!(doc["tool"]["name"], "netnorm");
    assert_eq!(doc["config"]["subcommand"], "hsep");
}

#[test]
fn invalid_instance_is_exit_2() {
    let out = run(&[
        "hsep",
        "--delta",
        "0.5",
        data("bad_locc.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn budget_exhaustion_is_exit_3() {
    let out = run(&[
        "hsep",
        "--delta",
        "0.5",
        "--budget",
        "1",
        data("locc_classic.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn two_to_q_consistency_path() {
    // Rows (1,0,1) and (0,2,0): A·A† = diag(2,4), so ‖A‖²_{2→2} = 4.
    let out = run(&[
        "two-to-q",
        "--q",
        "2",
        "--delta",
        "0.1",
        data("matrix_rect.json").to_str().unwrap(),
    ]);
    let doc = stdout_json(&out);
    let value = doc["report"]["value"].as_f64().unwrap();
    assert!((value - 4.0).abs() < 1e-9, "value {value}");
}

#[test]
fn channel_norm_depolarizing_value() {
    let out = run(&[
        "channel-norm",
        "--alpha",
        "2",
        "--delta",
        "0.2",
        data("channel_depol.json").to_str().unwrap(),
    ]);
    let doc = stdout_json(&out);
    let value = doc["report"]["value"].as_f64().unwrap();
    assert!(
        (value - 0.5f64.sqrt()).abs() < 1e-6,
        "value {value} vs {}",
        0.5f64.sqrt()
    );
}

#[test]
fn multiparty_chain_value() {
    let out = run(&[
        "hsep-multi",
        "--delta",
        "1.0",
        data("multiparty_chain.json").to_str().unwrap(),
    ]);
    let doc = stdout_json(&out);
    let value = doc["report"]["value"].as_f64().unwrap();
    assert!((value - 1.0).abs() < 1e-6, "value {value}");
}

#[test]
fn injective_and_general_paths() {
    let out = run(&[
        "injective",
        "--delta",
        "0.4",
        data("injective_l2.json").to_str().unwrap(),
    ]);
    let doc = stdout_json(&out);
    let value = doc["report"]["value"].as_f64().unwrap();
    assert!((value - 0.6).abs() < 1e-3, "value {value}");
    assert!(doc["report"]["factorization_estimate"].as_f64().unwrap() <= 1.0 + 1e-9);

    let out = run(&[
        "injective",
        "--delta",
        "0.3",
        data("general_s2.json").to_str().unwrap(),
    ]);
    let doc = stdout_json(&out);
    assert!(doc["report"]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn oracle_subcommands() {
    let out = run(&["oracle", data("locc_single.json").to_str().unwrap()]);
    let doc = stdout_json(&out);
    assert!((doc["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);

    let out = run(&[
        "oracle",
        "--q",
        "4",
        data("matrix_rect.json").to_str().unwrap(),
    ]);
    let doc = stdout_json(&out);
    assert!(doc["value"].as_f64().unwrap() >= 2.0 - 1e-9); // at least max column scale
}

#[test]
fn lemma_check_fast_passes() {
    let out = run(&["lemma-check", "--fast", "--seed", "5"]);
    let doc = stdout_json(&out);
    assert_eq!(doc["all_pass"], serde_json::Value::Bool(true), "doc: {doc}");
    assert_eq!(doc["lemmas"].as_array().unwrap().len(), 5);
}

#[test]
fn sample_instances_roundtrip() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        seen += 1;
        let text = std::fs::read_to_string(&path).unwrap();
        let inst: serde_json::Value = serde_json::from_str(&text).unwrap();
        let re = serde_json::to_string(&inst).unwrap();
        let inst2: serde_json::Value = serde_json::from_str(&re).unwrap();
        assert_eq!(inst, inst2, "{} does not round-trip", path.display());
    }
    assert!(seen >= 8, "sample set unexpectedly small ({seen})");
}

/// Byte-identical reports (timing scrubbed) at 1 and 8 worker threads on
/// the full sample-instance set.
#[test]
fn reports_identical_across_thread_counts() {
    let cases: Vec<Vec<String>> = vec![
        vec![
            "hsep".into(),
            "--delta".into(),
            "0.45".into(),
            data("locc_mixed.json").display().to_string(),
        ],
        vec![
            "hsep-sparse".into(),
            "--delta".into(),
            "0.6".into(),
            "--seed".into(),
            "7".into(),
            data("locc_classic.json").display().to_string(),
        ],
        vec![
            "hsep-multi".into(),
            "--delta".into(),
            "1.0".into(),
            data("multiparty_chain.json").display().to_string(),
        ],
        vec![
            "channel-norm".into(),
            "--alpha".into(),
            "2".into(),
            "--delta".into(),
            "0.2".into(),
            data("channel_depol.json").display().to_string(),
        ],
        vec![
            "two-to-q".into(),
            "--q".into(),
            "4".into(),
            "--delta".into(),
            "0.3".into(),
            data("matrix_rect.json").display().to_string(),
        ],
        vec![
            "injective".into(),
            "--delta".into(),
            "0.4".into(),
            data("injective_l2.json").display().to_string(),
        ],
        vec![
            "injective".into(),
            "--delta".into(),
            "0.3".into(),
            data("general_s2.json").display().to_string(),
        ],
    ];
    for case in cases {
        let mut runs = Vec::new();
        for threads in ["1", "8"] {
            let mut args: Vec<String> = case.clone();
            let insert_at = args.len() - 1;
            args.insert(insert_at, "--threads".into());
            args.insert(insert_at + 1, threads.into());
            let refs: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
            let out = run(&refs);
            let mut doc = stdout_json(&out);
            doc["report"]["wall_time_ms"] = serde_json::Value::from(0u64);
            doc["config"]["threads"] = serde_json::Value::Null;
            runs.push(serde_json::to_string(&doc).unwrap());
        }
        assert_eq!(
            runs[0], runs[1],
            "case {case:?} differs across thread counts"
        );
    }
}
