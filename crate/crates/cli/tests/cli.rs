use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_glt-lab"));
    c.env_remove("GLT_LAB_JOBS");
    c
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p
}

fn run(dir: &Path, cfg: &Path, out: &str, extra: &[&str]) -> Output {
    bin().arg("run").arg(cfg).arg("--out-dir").arg(dir.join(out)).args(extra).output().unwrap()
}

fn summary(dir: &Path, out: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(out).join("summary.json")).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Config error JSON from `validate --error-json`.
fn validate_error(text: &str) -> (i32, Value) {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), text);
    let o = bin().arg("validate").arg(&cfg).arg("--error-json").output().unwrap();
    let code = o.status.code().unwrap();
    let v = serde_json::from_str(stderr(&o).trim()).unwrap_or(Value::Null);
    (code, v)
}

const COS: &str = r#"{"coeffs": {"0": [2, 0], "1": [0.5, 0], "-1": [0.5, 0]}}"#;

#[test]
fn pa_on_identity_gives_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
  "sequences": {"I": {"kind": "identity"}},
  "tasks": [
    {"task": "pa", "name": "pa_id", "seq": "I", "dims": [4, 8],
     "expect": {"values": {"approx": 1.0, "tol": 0.0}}}
  ]
}"#,
    );
    let o = run(dir.path(), &cfg, "out", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/pa_id.csv")).unwrap();
    assert_eq!(csv, "kind,n,delta,value\np_acs,4,,1.0000000000000000e0\np_acs,8,,1.0000000000000000e0\n");
    assert_eq!(summary(dir.path(), "out")["pass"], Value::Bool(true));
}

#[test]
fn leading_ones_qw_headline_is_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
  "sequences": {"B": {"kind": "leading_ones", "m": 8}},
  "tasks": [
    {"task": "qw", "seq": "B", "dims": [16, 32, 64, 128, 256],
     "expect": {"headline": {"approx": 1.0, "tol": 1e-9}}}
  ]
}"#,
    );
    let o = run(dir.path(), &cfg, "out", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/01_qw.json")).unwrap()).unwrap();
    assert_eq!(report["checks"][0]["pass"], Value::Bool(true));
    assert!(dir.path().join("out/01_qw.csv").exists());
}

#[test]
fn leading_ones_against_zero_is_not_clustered() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
  "sequences": {"B": {"kind": "leading_ones", "m": 8}, "O": {"kind": "zero"}},
  "tasks": [
    {"task": "cluster", "name": "b_vs_o", "seq": "B", "minus": "O",
     "dims": [16, 32, 64, 128], "eps": [0.1, 0.5],
     "expect": {"label": "none", "uniform": false}}
  ]
}"#,
    );
    let o = run(dir.path(), &cfg, "out", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/b_vs_o.csv")).unwrap();
    assert!(csv.starts_with("n,eps,count,count_over_n,frob2,frob2_over_n\n"));
    assert!(csv.contains("\n128,1.0000000000000001e-1,16,1.2500000000000000e-1,"), "{csv}");
}

#[test]
fn failed_expectation_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
  "sequences": {"I": {"kind": "identity"}},
  "tasks": [
    {"task": "pa", "seq": "I", "dims": [4, 8], "expect": {"headline": {"max": 0.5}}},
    {"task": "pa", "seq": "I", "dims": [4, 8]}
  ]
}"#,
    );
    let o = run(dir.path(), &cfg, "out", &[]);
    assert_eq!(o.status.code(), Some(1));
    let s = summary(dir.path(), "out");
    assert_eq!(s["pass"], Value::Bool(false));
    assert_eq!(s["tasks"][1]["status"], "ok");

    let o = run(dir.path(), &cfg, "strict", &["--strict"]);
    assert_eq!(o.status.code(), Some(1));
    let s = summary(dir.path(), "strict");
    assert_eq!(s["tasks"][1]["status"], "skipped");
    assert!(!dir.path().join("strict/02_pa.csv").exists());
}

#[test]
fn numeric_failure_is_reported_per_task() {
    let dir = TempDir::new().unwrap();
    // a(x) = 1/(x - 1/2) hits a pole at the midpoint sample of n = 2.
    let cfg = write_config(
        dir.path(),
        r#"{
  "sequences": {"D": {"kind": "diag", "a": "1/(x - 0.5)"}, "I": {"kind": "identity"}},
  "tasks": [
    {"task": "pa", "name": "bad", "seq": "D", "dims": [2, 4]},
    {"task": "pa", "name": "good", "seq": "I", "dims": [2, 4]}
  ]
}"#,
    );
    let o = run(dir.path(), &cfg, "out", &[]);
    assert_eq!(o.status.code(), Some(1));
    let s = summary(dir.path(), "out");
    assert_eq!(s["tasks"][0]["status"], "error");
    assert_eq!(s["tasks"][1]["status"], "ok");
    let bad: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/bad.json")).unwrap()).unwrap();
    assert!(bad["error"].as_str().unwrap().contains("non-finite"), "{bad}");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(
            r#"{{
  "seed": 11,
  "symbols": {{"s": {{"f": {COS}}}}},
  "sequences": {{
    "T": {{"kind": "toeplitz", "f": {COS}}},
    "R": {{"kind": "random", "scale": 0.01}},
    "TR": {{"kind": "algebra", "expr": {{"op": "add", "args": ["T", "R"]}}}}
  }},
  "tasks": [
    {{"task": "qw", "seq": "TR", "dims": [8, 16, 32]}},
    {{"task": "cluster", "seq": "TR", "minus": "T", "dims": [8, 16, 32, 64], "eps": [0.1]}},
    {{"task": "distribution", "seq": "TR", "symbol": "s", "dims": [8, 16, 32, 64], "grid": 128}},
    {{"task": "precond", "seq": "TR", "unitary": "fourier", "dims": [8, 16, 32, 64], "eps": [0.1]}}
  ]
}}"#
        ),
    );
    let a = run(dir.path(), &cfg, "a", &["--jobs", "1"]);
    let b = run(dir.path(), &cfg, "b", &["--jobs", "4"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(b.status.code(), Some(0), "{}", stderr(&b));
    let mut names: Vec<_> = fs::read_dir(dir.path().join("a")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 10, "{names:?}");
    for n in names {
        let x = fs::read(dir.path().join("a").join(&n)).unwrap();
        let y = fs::read(dir.path().join("b").join(&n)).unwrap();
        assert_eq!(x, y, "{n:?} differs");
    }
    let s = summary(dir.path(), "a");
    assert_eq!(s["random_seeds"]["R"], 11);

    let c = run(dir.path(), &cfg, "c", &["--seed", "12"]);
    assert_eq!(c.status.code(), Some(0));
    assert_eq!(summary(dir.path(), "c")["random_seeds"]["R"], 12);
    assert_ne!(fs::read(dir.path().join("a/01_qw.csv")).unwrap(), fs::read(dir.path().join("c/01_qw.csv")).unwrap());
}

#[test]
fn unknown_sequence_is_located() {
    let (code, v) = validate_error(
        r#"{
  "sequences": {"I": {"kind": "identity"}},
  "tasks": [
    {"task": "pa", "seq": "I", "dims": [4, 8]},
    {"task": "qw",
     "seq": "missing", "dims": [4, 8]}
  ]
}"#,
    );
    assert_eq!(code, 2);
    assert_eq!(v["error"]["class"], "unknown_name");
    assert_eq!(v["error"]["line"], 6);
    assert!(v["error"]["path"].as_str().unwrap().ends_with("config.json"));
}

#[test]
fn unknown_symbol_and_generator_are_rejected() {
    let (code, v) = validate_error(
        r#"{"sequences": {"I": {"kind": "identity"}},
 "tasks": [{"task": "distribution", "seq": "I", "symbol": "nope", "dims": [4, 8, 16, 32]}]}"#,
    );
    assert_eq!((code, v["error"]["class"].as_str()), (2, Some("unknown_name")));
    let (code, v) = validate_error(&format!(
        r#"{{"symbols": {{"g": {{"f": {COS}}}}}, "sequences": {{"T": {{"kind": "toeplitz", "f": {COS}}}}},
 "tasks": [{{"task": "korovkin", "generators": [{{"name": "g", "symbol": "g", "seq": "T"}}],
   "elements": [{{"name": "e", "word": {{"op": "mul", "args": [{{"gen": "g"}}, {{"gen": "h"}}]}}}}],
   "unitary": "fourier", "dims": [4, 8], "eps": [0.1]}}]}}"#
    ));
    assert_eq!((code, v["error"]["class"].as_str()), (2, Some("unknown_name")));
    assert_eq!(v["error"]["line"], 3);
}

#[test]
fn non_increasing_dims_are_rejected() {
    let (code, v) = validate_error(
        r#"{
  "sequences": {"I": {"kind": "identity"}},
  "tasks": [
    {"task": "pa", "seq": "I",
     "dims": [8, 4]}
  ]
}"#,
    );
    assert_eq!(code, 2);
    assert_eq!(v["error"]["class"], "invalid_dims");
    assert_eq!(v["error"]["line"], 5);
    let (_, v) = validate_error(r#"{"sequences": {"I": {"kind": "identity"}}, "tasks": [{"task": "pa", "seq": "I", "dims": [4, 4]}]}"#);
    assert_eq!(v["error"]["class"], "invalid_dims");
}

#[test]
fn malformed_json_is_a_parse_error() {
    let (code, v) = validate_error("{\n  \"tasks\": [\n    {\"task\": \"pa\", \"seq\": }\n  ]\n}");
    assert_eq!(code, 2);
    assert_eq!(v["error"]["class"], "parse");
    assert_eq!(v["error"]["line"], 3);
    let (_, v) = validate_error(r#"{"tasks": [{"task": "bogus"}]}"#);
    assert_eq!(v["error"]["class"], "parse");
}

#[test]
fn out_of_range_parameters_are_invalid_config() {
    let (code, v) = validate_error(
        r#"{"sequences": {"I": {"kind": "identity"}},
 "tasks": [{"task": "qw", "seq": "I", "dims": [4, 8], "deltas": [0.7]}]}"#,
    );
    assert_eq!((code, v["error"]["class"].as_str()), (2, Some("invalid_config")));
    let (_, v) = validate_error(
        r#"{"sequences": {"I": {"kind": "identity"}},
 "tasks": [{"task": "pa", "seq": "I", "dims": [4, 8], "expect": {"label": "strong"}}]}"#,
    );
    assert_eq!(v["error"]["class"], "invalid_config");
    let (_, v) = validate_error(
        r#"{"sequences": {"A": {"kind": "algebra", "expr": {"op": "add", "args": ["A", "A"]}}},
 "tasks": [{"task": "pa", "seq": "A", "dims": [4, 8]}]}"#,
    );
    assert_eq!(v["error"]["class"], "invalid_config");
}

fn write_identity(path: &Path, n: usize) {
    let mut s = format!("n={n}\n");
    for r in 0..n {
        for c in 0..n {
            s.push_str(if r == c { "1,0\n" } else { "0,0\n" });
        }
    }
    fs::write(path, s).unwrap();
}

#[test]
fn matrix_files_feed_tasks() {
    let dir = TempDir::new().unwrap();
    fs::create_dir(dir.path().join("mats")).unwrap();
    for n in [4, 8] {
        write_identity(&dir.path().join(format!("mats/id_{n}.csv")), n);
    }
    let cfg = write_config(
        dir.path(),
        r#"{
  "sequences": {"M": {"kind": "file", "path": "mats/id_{n}.csv"}},
  "tasks": [
    {"task": "pa", "name": "from_file", "seq": "M", "dims": [4, 8], "expect": {"values": {"approx": 1.0, "tol": 0.0}}},
    {"task": "precond", "seq": "M", "unitary": {"explicit": "mats/id_{n}.csv"}, "dims": [4, 8], "eps": [0.1],
     "expect": {"frobenius": "inconclusive"}}
  ]
}"#,
    );
    let o = run(dir.path(), &cfg, "out", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/from_file.csv")).unwrap();
    assert!(csv.ends_with("p_acs,8,,1.0000000000000000e0\n"));
}

#[test]
fn matrix_file_shape_mismatch_is_located() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("m_4.csv"), "n=4\n1,0\n0,0\n").unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"sequences": {"M": {"kind": "file", "path": "m_{n}.csv"}},
 "tasks": [{"task": "pa", "seq": "M", "dims": [4]}]}"#,
    );
    let o = bin().arg("run").arg(&cfg).arg("--out-dir").arg(dir.path().join("out")).arg("--error-json").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(v["error"]["class"], "matrix_file_shape");
    assert!(v["error"]["path"].as_str().unwrap().ends_with("m_4.csv"));
    assert!(!dir.path().join("out").exists());

    // header dimension differs from the requested one
    fs::write(dir.path().join("m_4.csv"), "n=2\n1,0\n0,0\n0,0\n1,0\n").unwrap();
    let o = bin().arg("validate").arg(&cfg).arg("--error-json").output().unwrap();
    let v: Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(v["error"]["class"], "matrix_file_shape");
    assert_eq!(v["error"]["line"], 1);
}

#[test]
fn korovkin_refuses_unbounded_generator() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
  "symbols": {"g": {"a": "1/x", "f": {"coeffs": {"0": [1, 0]}}}},
  "sequences": {"D": {"kind": "diag", "a": "1/x"}},
  "tasks": [
    {"task": "korovkin", "name": "refuse", "generators": [{"name": "d", "symbol": "g", "seq": "D"}],
     "unitary": "fourier", "dims": [4, 8, 16, 32], "eps": [0.1], "expect": {"refused": true}}
  ]
}"#,
    );
    let o = run(dir.path(), &cfg, "out", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/refuse.json")).unwrap()).unwrap();
    assert_eq!(r["report"]["refused"], Value::Bool(true));
    assert_eq!(r["report"]["bound"], 16.0);
}

#[test]
fn korovkin_trig_generators_pass() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
  "symbols": {
    "e1": {"f": {"coeffs": {"1": [1, 0]}}},
    "em1": {"f": {"coeffs": {"-1": [1, 0]}}}
  },
  "sequences": {
    "T1": {"kind": "toeplitz", "f": {"coeffs": {"1": [1, 0]}}},
    "Tm1": {"kind": "toeplitz", "f": {"coeffs": {"-1": [1, 0]}}}
  },
  "tasks": [
    {"task": "korovkin", "name": "trig",
     "generators": [{"name": "p", "symbol": "e1", "seq": "T1"}, {"name": "m", "symbol": "em1", "seq": "Tm1"}],
     "elements": [{"name": "pm", "word": {"op": "mul", "args": [{"gen": "p"}, {"gen": "m"}]}}],
     "unitary": "fourier", "dims": [16, 32, 64, 128], "eps": [0.1], "bound": 1.0,
     "expect": {"pass": true, "label": "strong", "refused": false}}
  ]
}"#,
    );
    let o = run(dir.path(), &cfg, "out", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary_csv = fs::read_to_string(dir.path().join("out/trig.csv")).unwrap();
    assert!(summary_csv.starts_with("stage,role,eps,label,frobenius\n"));
    assert!(summary_csv.contains("sum_ggstar,hypothesis,"));
    for stage in ["p", "m", "sum_ggstar", "pm"] {
        assert!(dir.path().join(format!("out/trig.{stage}.csv")).exists(), "{stage}");
    }
}

#[test]
fn isometry_writes_estimate_and_evidence() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(
            r#"{{"symbols": {{"s": {{"f": {COS}}}}}, "sequences": {{"T": {{"kind": "toeplitz", "f": {COS}}}}},
 "tasks": [{{"task": "isometry", "name": "iso", "seq": "T", "symbol": "s", "p": 1, "dims": [16, 32, 64, 128],
   "deltas": [0.0], "grid": 256, "expect": {{"headline": {{"approx": 2.0, "tol": 1e-6}}, "max_relative_gap": 1e-6}}}}]}}"#
        ),
    );
    let o = run(dir.path(), &cfg, "out", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("out/iso.distribution.csv").exists());
}

#[test]
fn schema_is_json_with_all_task_kinds() {
    let o = bin().arg("schema").output().unwrap();
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let kinds: Vec<&str> =
        v["$defs"]["task"]["oneOf"].as_array().unwrap().iter().map(|t| t["properties"]["task"]["const"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["pa", "dacs", "qw", "qwp", "cluster", "distribution", "isometry", "precond", "korovkin"]);
}
