//! End-to-end checks of the command-line surface: exit codes, JSON shapes,
//! determinism, and the documented examples.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_padic-gauge"))
}

fn run_json(args: &[&str]) -> (i32, serde_json::Value) {
    let out = bin().args(args).output().expect("spawn binary");
    let code = out.status.code().unwrap_or(-1);
    let text = String::from_utf8_lossy(&out.stdout);
    let value = serde_json::from_str(&text)
        .unwrap_or_else(|e| panic!("bad JSON from {args:?}: {e}\n{text}"));
    (code, value)
}

#[test]
fn polygon_cubic_fourfold() {
    let (code, v) = run_json(&["polygon", "--i", "4", "--h", "0,1,21,1,0"]);
    assert_eq!(code, 0);
    assert_eq!(v["window_bound"], 1);
    assert_eq!(v["kernel_lower_bound"], 22);
}

#[test]
fn polygon_rejects_low_degree() {
    let out = bin()
        .args(["polygon", "--i", "1", "--h", "1,1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["kind"], "input");
}

#[test]
fn frobenius_torus_is_p() {
    let dir = std::env::temp_dir().join("padic-gauge-test-torus");
    std::fs::create_dir_all(&dir).unwrap();
    let model = dir.join("torus.model");
    std::fs::write(&model, "kind=torus p=7 N=6 D=40\n").unwrap();
    let (code, v) = run_json(&["frobenius", "--model", model.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["matrix"], serde_json::json!([["1:1"]]));
    assert_eq!(v["slopes"], serde_json::json!([["1/1", 1]]));
}

#[test]
fn frobenius_curve_reports_point_count() {
    let dir = std::env::temp_dir().join("padic-gauge-test-curve");
    std::fs::create_dir_all(&dir).unwrap();
    let model = dir.join("curve.model");
    std::fs::write(&model, "kind=hyperelliptic p=7 N=6 D=60 f=x^3+x+1\n").unwrap();
    let (code, v) = run_json(&["frobenius", "--model", model.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["point_count_trace"], 3);
    assert_eq!(v["slopes"], serde_json::json!([["0/1", 1], ["1/1", 1]]));
}

#[test]
fn slopes_command_reads_matrix_literal() {
    let dir = std::env::temp_dir().join("padic-gauge-test-slopes");
    std::fs::create_dir_all(&dir).unwrap();
    let mat = dir.join("m.json");
    std::fs::write(&mat, r#"[["0:0","1:1"],["0:1","0:0"]]"#).unwrap();
    let (code, v) = run_json(&["slopes", mat.to_str().unwrap(), "--p", "5"]);
    assert_eq!(code, 0);
    assert_eq!(v["slopes"], serde_json::json!([["1/2", 2]]));
    assert_eq!(
        v["polygon"]["breakpoints"],
        serde_json::json!([[0, "0/1"], [2, "1/1"]])
    );
}

#[test]
fn syntomic_grid_deterministic_output() {
    let dir = std::env::temp_dir().join("padic-gauge-test-syn");
    std::fs::create_dir_all(&dir).unwrap();
    let model = dir.join("line.model");
    std::fs::write(&model, "kind=affine_line p=5 N=6 D=60\n").unwrap();
    let out1 = dir.join("a.json");
    let out2 = dir.join("b.json");
    for out in [&out1, &out2] {
        let status = bin()
            .args([
                "syntomic",
                "--model",
                model.to_str().unwrap(),
                "--r-range",
                "-1..3",
                "--s-set",
                "1,2",
                "--q-range",
                "0..2",
                "--jobs",
                "2",
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    let a = std::fs::read(&out1).unwrap();
    let b = std::fs::read(&out2).unwrap();
    assert_eq!(a, b, "identical runs must produce byte-identical JSON");
}

#[test]
fn twist_tensor_examples() {
    let (code, v) = run_json(&[
        "twist", "--p", "5", "--r", "1", "--s", "2", "--r2", "1", "--s2", "2",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["tensor"], serde_json::json!({"n": 2, "m": 2, "d": 2}));
    let (code2, v2) = run_json(&[
        "twist", "--p", "5", "--r", "1", "--s", "2", "--r2", "-1", "--s2", "2",
    ]);
    assert_eq!(code2, 0);
    assert_eq!(v2["tensor"], serde_json::json!({"n": 0, "m": 2, "d": 2}));
    assert_eq!(v2["duality_pairing_value"], "0:2");
}

#[test]
fn precision_cap_respected() {
    let out = bin()
        .args(["twist", "--p", "5", "--r", "1", "--s", "2", "--N", "10"])
        .env("PADIC_GAUGE_MAX_N", "6")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = std::env::temp_dir().join("padic-gauge-test-config");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("gauge.conf");
    std::fs::write(&cfg, "p=5\nN=6\nD=40\n").unwrap();
    let (code, v) = run_json(&[
        "syntomic",
        "--config",
        cfg.to_str().unwrap(),
        "--r",
        "2",
        "--s",
        "1",
        "--q-range",
        "0..0",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["cells"][0]["verdict"], "Zero");
}

#[test]
fn verify_paper_single_case() {
    let (code, v) = run_json(&["verify-paper", "--case", "cubic-fourfold-bound"]);
    assert_eq!(code, 0);
    assert_eq!(v["cases"][0]["pass"], true);
}

#[test]
fn verify_paper_unknown_case_is_input_error() {
    let out = bin()
        .args(["verify-paper", "--case", "no-such-case"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn witt_suite_command() {
    let (code, v) = run_json(&["witt", "--p", "3", "--n", "2", "--dw", "20"]);
    assert_eq!(code, 0);
    assert_eq!(v["relation_failures"], 0);
    assert_eq!(v["asw_kernel_size"], "9");
}
