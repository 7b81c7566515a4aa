//! End-to-end checks of the command-line interface: wire formats, stream
//! output, exit codes, and the precision switch.

use std::process::{Command, Output};

fn prodkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prodkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is a single JSON document")
}

#[test]
fn analyze_emits_the_verdict_wire_format() {
    let out = prodkit(&[
        "analyze",
        "--seq",
        "exp((-1)^(n+1)/n)",
        "--n-max",
        "100000",
        "--eps",
        "1e-9",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["command"], "analyze");
    let r = &v["result"];
    assert_eq!(r["kind"], "Converges");
    assert!((r["limit_estimate"].as_f64().unwrap() - 2.0).abs() < 1e-3);
    for key in ["kind", "limit_estimate", "liminf", "limsup", "n_used", "eps", "evidence"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn analyze_accepts_json_value_lists() {
    let out = prodkit(&[
        "analyze",
        "--seq",
        "[2.0, 0.5, 2.0, 0.5, 2.0, 0.5, 2.0, 0.5, 2.0, 0.5, 2.0, 0.5, 2.0, 0.5, 2.0, 0.5]",
        "--n-max",
        "16",
        "--window",
        "12",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["result"]["kind"], "Oscillates");
}

#[test]
fn analyze_csv_trace_is_tabular() {
    let out = prodkit(&[
        "analyze",
        "--seq",
        "1+1/n",
        "--n-max",
        "100",
        "--window",
        "50",
        "--format",
        "csv",
        "--every",
        "25",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,u_n");
    assert!(lines[1].starts_with("25,"));
    assert!(lines.last().unwrap().starts_with("100,"));
    // telescoping: u_100 = 101
    let u: f64 = lines.last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((u - 101.0).abs() < 1e-9);
}

#[test]
fn parse_errors_exit_one_with_position() {
    let out = prodkit(&["analyze", "--seq", "exp(1/n^", "--n-max", "100"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("offset 8"), "stderr: {err}");
}

#[test]
fn missing_matrix_file_exits_one() {
    let out = prodkit(&[
        "matrix",
        "apply",
        "--matrix",
        "/nonexistent/matrix.json",
        "--vector",
        "[2.0, 3.0]",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn strict_mode_exits_two_on_hypothesis_failure() {
    // not >= 1 from the first index: the condensation hypothesis fails
    let args = [
        "test",
        "condense",
        "--seq",
        "1 - 1/(2*n)",
        "--n-max",
        "1000",
        "--depth",
        "10",
    ];
    let relaxed = prodkit(&args);
    assert_eq!(relaxed.status.code(), Some(0));

    let mut strict_args = args.to_vec();
    strict_args.push("--strict");
    let strict = prodkit(&strict_args);
    assert_eq!(strict.status.code(), Some(2));
}

#[test]
fn rearrange_writes_a_jsonl_trace() {
    let dir = std::env::temp_dir().join("prodkit-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let trace = dir.join("trace.jsonl");
    let out = prodkit(&[
        "rearrange",
        "--seq",
        "exp((-1)^(n+1)/n)",
        "--alpha",
        "1",
        "--beta",
        "2",
        "--max-factors",
        "50000",
        "--trace-file",
        trace.to_str().unwrap(),
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["result"]["verdict"]["kind"], "Oscillates");

    let text = std::fs::read_to_string(&trace).unwrap();
    let first = text.lines().next().expect("at least one milestone");
    let m: serde_json::Value = serde_json::from_str(first).unwrap();
    for key in ["i", "m_i", "k_i", "u_at_m", "u_at_k"] {
        assert!(m.get(key).is_some(), "trace line missing {key}");
    }
    std::fs::remove_file(&trace).ok();
}

#[test]
fn unordered_suite_reports_routes() {
    let out = prodkit(&[
        "unordered",
        "suite",
        "--family",
        "exp(1/n^2)",
        "--horizon",
        "100000",
        "--enumerations",
        "4",
        "--seed",
        "1",
        // at this horizon the realized prefixes differ by ~1/horizon
        "--value-tol",
        "1e-4",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["result"]["all_routes_agree"], true);
    assert_eq!(v["result"]["routes"].as_array().unwrap().len(), 6);
}

#[test]
fn unordered_accepts_explicit_pairs() {
    let out = prodkit(&[
        "unordered",
        "converges",
        "--family",
        "[[3, 2.0], [-1, 0.5], [7, 4.0]]",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["result"]["kind"], "Converges");
    assert!((v["result"]["limit_estimate"].as_f64().unwrap() - 4.0).abs() < 1e-12);
}

#[test]
fn cesaro_csv_stream() {
    let out = prodkit(&[
        "test",
        "cesaro",
        "--seq",
        "(1/2)^((-1)^(n+1))",
        "--n-max",
        "10000",
        "--every",
        "2500",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n,sigma_n"));
    let last = text.lines().last().unwrap();
    let sigma: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!((sigma - 0.5f64.sqrt()).abs() < 1e-2);
}

#[test]
fn matrix_regular_csv_and_closed_form() {
    let out = prodkit(&[
        "matrix",
        "regular",
        "--kind",
        "cesaro",
        "--seq",
        "1+1/n",
        "--m-max",
        "65536",
        "--eps",
        "1e-3",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("m,y_m"));
    let last = text.lines().last().unwrap();
    let mut parts = last.split(',');
    let m: f64 = parts.next().unwrap().parse().unwrap();
    let y: f64 = parts.next().unwrap().parse().unwrap();
    assert_eq!(m, 65536.0);
    assert!((y - (m + 1.0).powf(1.0 / m)).abs() < 1e-12);
}

#[test]
fn matrix_apply_inline_json() {
    let out = prodkit(&[
        "matrix",
        "apply",
        "--matrix",
        r#"{"rows": [[1.0, 2.0], [0.0, 1.0]]}"#,
        "--vector",
        "[2.0, 3.0]",
    ]);
    let v = stdout_json(&out);
    let result = v["result"]["result"].as_array().unwrap();
    assert!((result[0].as_f64().unwrap() - 18.0).abs() < 1e-12);
    assert!((result[1].as_f64().unwrap() - 3.0).abs() < 1e-12);
}

#[test]
fn power_scan_covers_the_grid() {
    let out = prodkit(&[
        "power",
        "scan",
        "--base-seq",
        "n/(n+1)",
        "--origin",
        "1",
        "--x-grid",
        "[-1.0, 0.0, 0.5]",
        "--n-max",
        "50000",
    ]);
    let v = stdout_json(&out);
    let rows = v["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        assert_eq!(row[1]["kind"], "Converges", "x = {}", row[0]);
    }
}

#[test]
fn power_scan_accepts_colon_grids() {
    let out = prodkit(&[
        "power",
        "scan",
        "--base-seq",
        "n/(n+1)",
        "--origin",
        "1",
        "--x-grid",
        "-0.5:0.5:0.5",
        "--n-max",
        "20000",
    ]);
    let v = stdout_json(&out);
    let rows = v["result"]["rows"].as_array().unwrap();
    let xs: Vec<f64> = rows.iter().map(|r| r[0].as_f64().unwrap()).collect();
    assert_eq!(xs, vec![-0.5, 0.0, 0.5]);
}

#[test]
fn summability_kind_accepts_json() {
    let out = prodkit(&[
        "matrix",
        "regular",
        "--kind",
        r#"{"kind": "cesaro"}"#,
        "--seq",
        "1",
        "--m-max",
        "1024",
        "--eps",
        "1e-9",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["result"]["tends_to_one"], true);
}

#[test]
fn power_eval_endpoint_diverges_to_zero() {
    let out = prodkit(&[
        "power",
        "eval",
        "--base-seq",
        "n/(n+1)",
        "--origin",
        "1",
        "--x",
        "1",
        "--n-max",
        "100000",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["result"]["kind"], "DivergesToZero");
}

#[test]
fn oracle_subcommand_agrees() {
    let out = prodkit(&["oracle", "--seq", "exp(1/n^2)", "--n-max", "100000"]);
    let v = stdout_json(&out);
    assert_eq!(v["result"]["kinds_agree"], true);
    assert_eq!(v["result"]["ok"], true);
}

#[test]
fn precision_env_var_selects_the_accumulator() {
    let run = |precision: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_prodkit"))
            .env("PRODKIT_PRECISION", precision)
            .args(["analyze", "--seq", "exp((-1)^(n+1)/n)", "--n-max", "50000"])
            .output()
            .expect("binary runs");
        stdout_json(&out)
    };
    let fast = run("fast");
    let oracle = run("oracle");
    assert_eq!(fast["result"]["kind"], "Converges");
    assert_eq!(oracle["result"]["kind"], "Converges");
    let a = fast["result"]["limit_estimate"].as_f64().unwrap();
    let b = oracle["result"]["limit_estimate"].as_f64().unwrap();
    assert!((a - b).abs() < 1e-9);
}

#[test]
fn invariance_subcommand_reports_spread() {
    let out = prodkit(&[
        "invariance",
        "--seq",
        "exp((-1)^(n+1)/n^2)",
        "--trials",
        "10",
        "--n-max",
        "10000",
        "--seed",
        "9",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["result"]["pass"], true);
}

#[test]
fn tails_subcommand_with_spot_checks() {
    let out = prodkit(&[
        "tails",
        "--seq",
        "exp((-1)^(n+1)/n^2)",
        "--eps",
        "1e-3",
        "--horizon",
        "50000",
        "--exponent-trials",
        "20",
        "--mask-trials",
        "20",
    ]);
    let v = stdout_json(&out);
    let n0 = v["result"]["bound"]["n0"].as_u64().unwrap();
    assert!((900..=1100).contains(&n0));
    assert_eq!(v["result"]["spot_check"]["violations"], 0);
}
