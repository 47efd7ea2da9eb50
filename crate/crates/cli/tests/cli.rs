use std::fs;
use std::process::{Command, Output};

use tempfile::tempdir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uncloneable"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows as field vectors; no test input needs quoted fields.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn value_of(row: &[String], header: &str, csv: &str) -> String {
    let idx = csv
        .lines()
        .next()
        .unwrap()
        .split(',')
        .position(|h| h == header)
        .unwrap();
    row[idx].clone()
}

#[test]
fn o2h_prints_exact_values() {
    let out = run(&["o2h"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(
        text,
        "quantity,value,stderr,reference,tolerance,check,pass\n\
         success,0.5625,,0.5625,1e-9,near,true\n\
         extraction,0,,0,1e-12,near,true\n\
         rhs,4.5,,4.5,0,near,true\n"
    );
}

#[test]
fn lemma1_bb84_quarter() {
    let out = run(&["lemma1", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let r = &rows(&text)[0];
    assert_eq!(value_of(r, "value", &text), "0.5625");
    assert_eq!(value_of(r, "reference", &text), "0.5625");
    assert_eq!(value_of(r, "mu", &text), "1");
    assert_eq!(value_of(r, "pass", &text), "true");
}

#[test]
fn seed_is_mandatory_for_randomized_runs() {
    for cmd in [
        "lemma1",
        "theorem2",
        "erlang",
        "seesaw",
        "meg",
        "conjecture-scan",
    ] {
        let out = run(&[cmd]);
        assert_eq!(out.status.code(), Some(1), "{cmd}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
    }
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["nonsense"]).status.code(), Some(1));
    assert_eq!(run(&["o2h", "--seed", "x"]).status.code(), Some(1));
    assert_eq!(
        run(&["theorem2", "--seed", "1", "--trials", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["o2h", "--config", "/nonexistent/config.json"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn bad_config_exits_one() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("c.json");
    fs::write(&path, r#"{"seed": 1, "unknown_field": true}"#).unwrap();
    assert_eq!(
        run(&["o2h", "--config", path.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
    fs::write(
        &path,
        r#"{"seed": 1, "scheme": {"type": "no_such_scheme"}}"#,
    )
    .unwrap();
    assert_eq!(
        run(&["lemma1", "--config", path.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
    fs::write(&path, r#"{"experiment": "meg"}"#).unwrap();
    assert_eq!(
        run(&["o2h", "--config", path.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn failed_check_exits_two() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("c.json");
    // zero slack around the qubit closed form cannot hold for a finite sample
    fs::write(
        &path,
        r#"{"seed": 5, "trials": 50, "sizes": [[2, 2]], "tolerance": {"abs": 0}}"#,
    )
    .unwrap();
    let out = run(&["theorem2", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains(",false"));
}

#[test]
fn identical_seed_gives_identical_bytes() {
    for args in [
        ["theorem2", "--seed", "42", "--trials", "2000"],
        ["erlang", "--seed", "42", "--trials", "2000"],
        ["meg", "--seed", "42", "--trials", "1"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let a = run(&["theorem2", "--seed", "1", "--trials", "2000"]);
    let b = run(&["theorem2", "--seed", "2", "--trials", "2000"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn flags_override_config() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    let out = dir.path().join("report.csv");
    fs::write(&cfg, r#"{"seed": 3, "trials": 100, "ns": [2]}"#).unwrap();
    let res = run(&[
        "erlang",
        "--config",
        cfg.to_str().unwrap(),
        "--trials",
        "20000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0));
    assert!(res.stdout.is_empty());
    let text = fs::read_to_string(&out).unwrap();
    let r = &rows(&text)[0];
    assert_eq!(value_of(r, "trials", &text), "20000");
    assert_eq!(value_of(r, "reference", &text), "0.75");
}

#[test]
fn json_output() {
    let out = run(&["o2h", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["experiment"], "o2h");
    assert!((v["rows"][0]["value"].as_f64().unwrap() - 0.5625).abs() < 1e-9);
    assert_eq!(v["rows"][0]["check"], "near");
    assert_eq!(v["rows"][2]["pass"], true);
}

#[test]
fn theorem2_qubit_closed_form() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"sizes": [[2, 2]]}"#).unwrap();
    let out = run(&[
        "theorem2",
        "--seed",
        "6",
        "--trials",
        "100000",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let closed = &rows(&text)[1];
    assert_eq!(closed[0], "qubit_closed_form");
    let mean: f64 = value_of(closed, "value", &text).parse().unwrap();
    assert!((mean - 0.75).abs() < 0.01);
}

#[test]
fn theorem2_default_sizes_pass() {
    let out = run(&["theorem2", "--seed", "7", "--trials", "4000"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert_eq!(rows(&stdout(&out)).len(), 5);
}

#[test]
fn erlang_defaults_pass() {
    let out = run(&["erlang", "--seed", "8", "--trials", "20000"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    let n64 = rows(&text).into_iter().find(|r| r[0] == "64").unwrap();
    let reference: f64 = value_of(&n64, "reference", &text).parse().unwrap();
    assert!((reference - 0.045790 * 6.0 / 64.0).abs() < 1e-6);
}

#[test]
fn seesaw_bb84_cloner_keeps_warm_start() {
    let out = run(&["seesaw", "--seed", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let r = rows(&text);
    assert_eq!(value_of(&r[0], "value", &text), "0.5625");
    let v: f64 = value_of(&r[1], "value", &text).parse().unwrap();
    assert!(v >= 0.5625 - 1e-6);
}

#[test]
fn meg_gap_and_dump() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    let dump = dir.path().join("dump.json");
    fs::write(
        &cfg,
        format!(
            r#"{{"key_samples": 12, "dump": {:?}}}"#,
            dump.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = run(&["meg", "--seed", "10", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for r in rows(&text).iter().filter(|r| r[3] == "transposed") {
        let lhs: f64 = value_of(r, "value", &text).parse().unwrap();
        let rhs: f64 = value_of(r, "reference", &text).parse().unwrap();
        assert!((lhs - rhs).abs() < 1e-8);
    }
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&dump).unwrap()).unwrap();
    assert_eq!(v["game"]["effects"].as_array().unwrap().len(), 12);
    assert_eq!(v["strategies"].as_array().unwrap().len(), 2);
    assert_eq!(v["strategies"][0][1]["dims"], serde_json::json!([4, 5, 5]));
}

#[test]
fn conjecture_scan_has_no_verdicts() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"M": 2, "d": 3, "key_samples": 2, "restarts": 1}"#).unwrap();
    let out = run(&[
        "conjecture-scan",
        "--seed",
        "11",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let r = rows(&text);
    assert_eq!(r.len(), 1);
    assert_eq!(value_of(&r[0], "check", &text), "estimate");
    assert_eq!(value_of(&r[0], "pass", &text), "");
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(rows(&stdout(&out))
        .iter()
        .all(|r| r.last().unwrap() == "true"));
}
