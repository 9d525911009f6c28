use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn flexmatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flexmatch")).args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bounds_at_a_point_is_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.json");
    let o = flexmatch(&["bounds", "--base", "1", "--extra", "1", "--p", "0.5", "-o", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["upper"].as_f64().unwrap(), 0.75);
    assert!(v["lower"].as_f64().unwrap() >= 11.0 / 15.0 - 1e-12);
}

#[test]
fn missing_config_exits_2_and_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = flexmatch(&["sweep", "--config", "missing.json", "-o", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.json"));
}

#[test]
fn missing_seed_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = flexmatch(&["sweep", "-o", path_str(&dir.path().join("x.csv"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
}

#[test]
fn invalid_field_exits_2_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"mode": "sweep", "seed": 1, "alphas": [0.9, 0.1]}"#).unwrap();
    let o = flexmatch(&["sweep", "--config", path_str(&cfg), "-o", path_str(&dir.path().join("x.csv"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`alphas`"));
}

#[test]
fn unknown_subcommand_exits_2() {
    assert_eq!(flexmatch(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_1() {
    let o = flexmatch(&["bounds", "--base", "1", "--extra", "1", "--p", "0.5", "-o", "/nonexistent/dir/b.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/dir/b.json"));
}

#[test]
fn markov_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let args = ["markov", "--base", "1", "--extra", "0", "--p", "0.3", "--steps", "1000000", "--seed", "9"];
        let o = flexmatch(&[&args[..], &["--trials", "100", "-o", path_str(&out)]].concat());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("sweep,value,mean,std_dev,std_err,trials,base,extra,p,formula,closed_form\n"));
    assert!(text.contains(",0.666666667\n"), "{text}");
}

#[test]
fn thread_cap_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = flexmatch(&[
            "--threads",
            threads,
            "sweep",
            "--seed",
            "4",
            "--k",
            "2",
            "--n",
            "80",
            "--trials",
            "20",
            "--alphas",
            "0,0.5,1",
            "-o",
            path_str(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("one.csv", "1"), run("four.csv", "4"));
}

#[test]
fn flags_override_config_with_a_notice() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"mode": "counterexample", "seed": 1, "n": 100, "trials": 5}"#).unwrap();
    let out = dir.path().join("x.csv");
    let o = flexmatch(&["counterexample", "--config", path_str(&cfg), "--trials", "3", "-o", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("--trials overrides"));
    let r = flexmatch::output::read_csv(&out).unwrap();
    assert!(r.rows.iter().all(|row| row.trials == 3));
    assert_eq!(r.rows[0].labels[0], "uniform");
    assert_eq!(r.rows[0].mean, 0.0);
    assert!(r.rows[1].mean > 0.3);
}

#[test]
fn help_documents_the_csv_schema() {
    for sub in ["sweep", "radius-vs-volume", "markov", "bounds", "counterexample"] {
        let o = flexmatch(&[sub, "--help"]);
        assert!(o.status.success());
        let text = String::from_utf8_lossy(&o.stdout);
        assert!(text.contains("CSV columns") && text.contains("std_err"), "{sub}: {text}");
    }
}

#[test]
fn match_and_dplus_on_a_small_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.json");
    std::fs::write(&inst, r#"{"supply": [[0.5]], "demand": [[0.4], [0.6]], "ranges": [0.2]}"#).unwrap();
    let out = dir.path().join("m.json");
    let o = flexmatch(&["match", "--input", path_str(&inst), "-o", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["size"], 1);
    let o = flexmatch(&["dplus", "--input", path_str(&inst), "-o", path_str(&out)]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["indices"], serde_json::json!([0, 1]));
    assert_eq!(v["positions"], serde_json::json!([0.4, 0.6]));
}

#[test]
fn decompose_writes_the_steps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.json");
    let o = flexmatch(&["decompose", "--x", "3,1", "--y", "2,2", "-o", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["steps"], serde_json::json!([{"i": 0, "j": 1, "tau": 1.0}]));
    let o = flexmatch(&["decompose", "--x", "2,2", "--y", "3,1", "-o", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2));
}
