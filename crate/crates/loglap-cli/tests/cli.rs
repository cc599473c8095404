//! End-to-end tests of the binary: exit codes, diagnostics, output shapes,
//! and the determinism contract on the written artifacts.

use std::path::PathBuf;
use std::process::{Command, Output};

/// Scratch directory for one test, removed on drop.
struct Workspace {
    dir: PathBuf,
}

impl Workspace {
    fn new(tag: &str) -> Workspace {
        let dir = std::env::temp_dir().join(format!("loglap-cli-{tag}-{}", std::process::id()));
        if dir.exists() {
            std::fs::remove_dir_all(&dir).ok();
        }
        std::fs::create_dir_all(&dir).unwrap();
        Workspace { dir }
    }

    fn config(&self, name: &str, json: &str) -> PathBuf {
        let path = self.dir.join(name);
        std::fs::write(&path, json).unwrap();
        path
    }

    fn out(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }
}

impl Drop for Workspace {
    fn drop(&mut self) {
        std::fs::remove_dir_all(&self.dir).ok();
    }
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_loglap"));
    cmd.args(args);
    for (key, value) in envs {
        cmd.env(key, value);
    }
    cmd.output().unwrap()
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("process exited normally")
}

fn stderr_text(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn manifest_without_wall_times(dir: &std::path::Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("manifest.json")).unwrap();
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value
        .as_object_mut()
        .unwrap()
        .remove("wall_times_ms")
        .expect("manifest carries wall times");
    value
}

/// Manifest stripped of everything that names the particular run location,
/// for comparisons across output directories.
fn manifest_for_comparison(dir: &std::path::Path) -> serde_json::Value {
    let mut value = manifest_without_wall_times(dir);
    value["config"]
        .as_object_mut()
        .unwrap()
        .remove("out_dir")
        .expect("config echo carries the output directory");
    value
}

#[test]
fn constants_reports_closed_forms_and_exits_zero() {
    let ws = Workspace::new("constants");
    let cfg = ws.config("c.json", r#"{"command":"constants","s_list":[0.1,0.05]}"#);
    let out = ws.out("out");
    let result = run(&[cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert_eq!(code(&result), 0, "{}", stderr_text(&result));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("constants.json")).unwrap())
            .unwrap();
    // In one dimension the kernel normalizer collapses to 1.
    let c_1 = report["dimension"][0]["c_n"].as_f64().unwrap();
    assert!((c_1 - 1.0).abs() < 1e-12, "c_1 = {c_1}");
    assert_eq!(report["fractional"].as_array().unwrap().len(), 6);

    let manifest = manifest_without_wall_times(&out);
    assert_eq!(manifest["overall_pass"], serde_json::json!(true));
    let stdout = String::from_utf8_lossy(&result.stdout).into_owned();
    assert!(stdout.contains("kappa_limit"), "stdout echoes the report");
}

#[test]
fn malformed_json_reports_line_and_column() {
    let ws = Workspace::new("badjson");
    let cfg = ws.config("bad.json", "{\"command\": \"constants\",\n  }");
    let result = run(&[cfg.to_str().unwrap()], &[]);
    assert_eq!(code(&result), 2);
    let err = stderr_text(&result);
    assert!(
        err.contains("config error at line 2, column"),
        "diagnostic carries the location: {err}"
    );
}

#[test]
fn unknown_keys_are_rejected() {
    let ws = Workspace::new("unknownkey");
    let cfg = ws.config("u.json", r#"{"command":"constants","extra_key":1}"#);
    let result = run(&[cfg.to_str().unwrap()], &[]);
    assert_eq!(code(&result), 2);
    assert!(stderr_text(&result).contains("unknown field `extra_key`"));
}

#[test]
fn critical_lambda_is_a_regime_error() {
    let ws = Workspace::new("regime");
    let cfg = ws.config("r.json", r#"{"command":"solve-log","lambda":5.0,"n":32}"#);
    let out = ws.out("out");
    let result = run(&[cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert_eq!(code(&result), 2);
    let err = stderr_text(&result);
    assert!(err.starts_with("regime error:"), "{err}");
    // The manifest is still written, reporting the failed run.
    let manifest = manifest_without_wall_times(&out);
    assert_eq!(manifest["overall_pass"], serde_json::json!(false));
    assert!(manifest["error"].as_str().unwrap().contains("regime"));
}

#[test]
fn missing_lambda_is_a_config_error() {
    let ws = Workspace::new("nolambda");
    let cfg = ws.config("m.json", r#"{"command":"solve-log","n":32}"#);
    let result = run(&[cfg.to_str().unwrap()], &[]);
    assert_eq!(code(&result), 2);
    assert!(stderr_text(&result).contains("lambda"));
}

#[test]
fn unknown_check_is_a_config_error() {
    let ws = Workspace::new("badcheck");
    let cfg = ws.config("v.json", r#"{"command":"verify","check":"nope"}"#);
    let result = run(&[cfg.to_str().unwrap()], &[]);
    assert_eq!(code(&result), 2);
    assert!(stderr_text(&result).contains("available checks"));
}

#[test]
fn eigen_outputs_are_byte_identical_across_runs_and_threads() {
    let ws = Workspace::new("determinism");
    let cfg = ws.config(
        "e.json",
        r#"{"command":"eigen","n":64,"s_list":[0.2,0.1,0.05]}"#,
    );
    let outs = [ws.out("a"), ws.out("b"), ws.out("c")];
    for (out, threads) in outs.iter().zip(["1", "1", "4"]) {
        let result = run(
            &[cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
            &[("LOGLAP_THREADS", threads)],
        );
        assert_eq!(code(&result), 0, "{}", stderr_text(&result));
    }
    let reference = std::fs::read(outs[0].join("eigen.csv")).unwrap();
    for out in &outs[1..] {
        assert_eq!(
            std::fs::read(out.join("eigen.csv")).unwrap(),
            reference,
            "eigen.csv differs under {}",
            out.display()
        );
    }
    let manifest = manifest_for_comparison(&outs[0]);
    for out in &outs[1..] {
        assert_eq!(manifest_for_comparison(out), manifest);
    }
}

#[test]
fn csv_floats_reparse_to_identical_bits() {
    let ws = Workspace::new("roundtrip");
    let cfg = ws.config(
        "e.json",
        r#"{"command":"eigen","n":32,"s_list":[0.2,0.1,0.05]}"#,
    );
    let out = ws.out("out");
    let result = run(&[cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert_eq!(code(&result), 0, "{}", stderr_text(&result));

    let text = std::fs::read_to_string(out.join("eigen.csv")).unwrap();
    assert!(text.ends_with('\n') && !text.contains('\r'), "LF endings");
    let mut floats = 0;
    for line in text.lines().skip(1) {
        for field in line.split(',') {
            let value: f64 = field.parse().unwrap();
            assert_eq!(
                format!("{value:.16e}"),
                field,
                "field does not round-trip bit-exactly"
            );
            floats += 1;
        }
    }
    assert_eq!(floats, 18, "three rows of six floats");
}

#[test]
fn solution_tables_have_one_row_per_cell() {
    let ws = Workspace::new("solvelog");
    let cfg = ws.config("s.json", r#"{"command":"solve-log","lambda":-1.0,"n":64}"#);
    let out = ws.out("out");
    let result = run(&[cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert_eq!(code(&result), 0, "{}", stderr_text(&result));

    let solution = std::fs::read_to_string(out.join("solution_log.csv")).unwrap();
    assert_eq!(solution.lines().count(), 65, "header plus one row per cell");

    let summary = std::fs::read_to_string(out.join("solve_log.csv")).unwrap();
    let row = summary.lines().nth(1).unwrap();
    assert!(row.ends_with("nonnegative"), "{row}");
    let manifest = manifest_without_wall_times(&out);
    assert_eq!(manifest["overall_pass"], serde_json::json!(true));
}

#[test]
fn diaz_saa_writes_one_hundred_passing_rows() {
    let ws = Workspace::new("diazsaa");
    let cfg = ws.config(
        "d.json",
        r#"{"command":"verify","check":"diaz-saa","n":32,"seed":7}"#,
    );
    let out = ws.out("out");
    let result = run(&[cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert_eq!(code(&result), 0, "{}", stderr_text(&result));

    let table = std::fs::read_to_string(out.join("verify_diaz_saa.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 101, "header plus one hundred rows");
    assert!(lines[1..].iter().all(|l| l.ends_with("true")));
}

#[test]
fn unwritable_out_dir_exits_four() {
    let ws = Workspace::new("unwritable");
    let cfg = ws.config("c.json", r#"{"command":"constants"}"#);
    let blocker = ws.dir.join("blocker");
    std::fs::write(&blocker, b"file, not a directory").unwrap();
    let nested = blocker.join("sub");
    let result = run(&[cfg.to_str().unwrap(), "--out", nested.to_str().unwrap()], &[]);
    assert_eq!(code(&result), 4);
    assert!(stderr_text(&result).contains("output error"));
}

#[test]
fn check_failures_exit_one() {
    // At n = 64 the boundary-rate window spans half the domain and the
    // fitted slope lands far outside the accepted band, so the run
    // completes but the verdict is a failure.
    let ws = Workspace::new("checkfail");
    let cfg = ws.config(
        "b.json",
        r#"{"command":"verify","check":"boundary","lambda":-1.0,"n":64}"#,
    );
    let out = ws.out("out");
    let result = run(&[cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert_eq!(code(&result), 1, "{}", stderr_text(&result));

    let table = std::fs::read_to_string(out.join("verify_boundary.csv")).unwrap();
    assert!(table.lines().nth(1).unwrap().ends_with("false"));
    let manifest = manifest_without_wall_times(&out);
    assert_eq!(manifest["overall_pass"], serde_json::json!(false));
}

#[test]
fn unreachable_tolerance_exits_three_with_manifest() {
    let ws = Workspace::new("nonconv");
    let cfg = ws.config(
        "t.json",
        r#"{"command":"solve-log","lambda":-1.0,"n":32,"tol":{"grad":1e-30}}"#,
    );
    let out = ws.out("out");
    let result = run(&[cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert_eq!(code(&result), 3, "{}", stderr_text(&result));
    assert!(stderr_text(&result).contains("did not converge"));

    let manifest = manifest_without_wall_times(&out);
    assert_eq!(manifest["overall_pass"], serde_json::json!(false));
    assert!(manifest["error"].as_str().unwrap().contains("converge"));
}

#[test]
fn cli_overrides_beat_the_config() {
    let ws = Workspace::new("overrides");
    let cfg = ws.config(
        "o.json",
        r#"{"command":"verify","check":"log-sobolev","n":32,"seed":1}"#,
    );
    let out = ws.out("out");
    let result = run(
        &[
            cfg.to_str().unwrap(),
            "--n",
            "64",
            "--seed",
            "9",
            "--out",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&result), 0, "{}", stderr_text(&result));
    let manifest = manifest_without_wall_times(&out);
    assert_eq!(manifest["config"]["n"], serde_json::json!(64));
    assert_eq!(manifest["config"]["seed"], serde_json::json!(9));
    let table = std::fs::read_to_string(out.join("verify_log_sobolev.csv")).unwrap();
    assert!(table.contains("\"\"seed\"\":9"), "rows record the seed");
}
