use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kpell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kpell")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn values(v: &Value, key: &str) -> Vec<String> {
    v[key].as_array().unwrap().iter().map(|t| t["value"].as_str().unwrap().to_owned()).collect()
}

#[test]
fn generate_known_prefixes() {
    let out = kpell(&["generate", "--k", "2", "--n-max", "6"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(values(&json(&out), "terms"), ["0", "1", "2", "5", "12", "29", "70"]);

    let out = kpell(&["generate", "--k", "3", "--n-max", "6"]);
    let v = json(&out);
    let terms = values(&v, "terms");
    assert_eq!(&terms[5..], ["13", "33", "84"]);
    assert_eq!(v["terms"][0]["n"], -1);
}

#[test]
fn search_exit_codes() {
    let out = kpell(&["search", "--k-min", "3", "--k-max", "12", "--n-max", "60", "--expect-theorem"]);
    assert_eq!(out.status.code(), Some(0));
    let sols: Vec<(u64, u64)> = json(&out)["solutions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| (s["k"].as_u64().unwrap(), s["n"].as_u64().unwrap()))
        .collect();
    assert_eq!(sols, [(3, 5), (4, 6)]);

    // The expected set is restricted to the domain.
    let out = kpell(&["search", "--k-min", "5", "--k-max", "9", "--expect-theorem"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["solutions"].as_array().unwrap().is_empty());

    // One-digit values are outside the theorem, so they register as a mismatch.
    let out = kpell(&["search", "--k-min", "3", "--k-max", "5", "--n-max", "10", "--m-min", "1", "--expect-theorem"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(kpell(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(kpell(&["reduce", "--stage", "4"]).status.code(), Some(2));
    assert_eq!(kpell(&["reduce", "--stage", "1", "--k-min", "2"]).status.code(), Some(2));
}

#[test]
fn reductions_from_the_command_line() {
    let out = kpell(&["reduce", "--stage", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["variable_max"], 889);

    let out = kpell(&["reduce", "--stage", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["variable_max"].as_u64().unwrap() < 400);
    assert_eq!(v["contradiction"], true);
}

#[test]
fn starved_precision_exits_4() {
    let out = kpell(&["reduce", "--stage", "3", "--precision-bits", "64", "--precision-cap", "64"]);
    assert_eq!(out.status.code(), Some(4));
}

fn checkpoint_files(dir: &Path) -> usize {
    std::fs::read_dir(dir.join("stage1")).map(|d| d.count()).unwrap_or(0)
}

#[test]
fn checkpointed_reduce_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let cp = dir.path().to_str().unwrap();
    let args = ["reduce", "--stage", "1", "--k-min", "3", "--k-max", "6", "--checkpoint", cp];
    let first = kpell(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(checkpoint_files(dir.path()), 4 * 9);
    let second = kpell(&args);
    assert_eq!(json(&first)["records"], json(&second)["records"]);
}

fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("elapsed_ms");
            m.values_mut().for_each(strip_timing);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

#[test]
fn verify_report_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<Value> = std::thread::scope(|s| {
        let handles: Vec<_> = ["1", "4"]
            .into_iter()
            .map(|jobs| {
                let path = dir.path().join(format!("report-{jobs}.json"));
                s.spawn(move || {
                    let p = path.to_str().unwrap();
                    let out = kpell(&["verify-paper", "--k-max", "10", "--jobs", jobs, "--out", p]);
                    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
                    serde_json::from_str::<Value>(&std::fs::read_to_string(&path).unwrap()).unwrap()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let report = &runs[0];
    assert_eq!(report["verdict"], "pass");
    let names: Vec<&str> = report["stages"].as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap()).collect();
    for want in ["stage1-reduction", "stage2-reduction", "stage3-reduction", "exhaustive-search"] {
        assert!(names.contains(&want), "missing section {want}");
    }
    let sols: Vec<[u64; 4]> = report["solutions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| ["n", "k", "d", "m"].map(|f| s[f].as_u64().unwrap()))
        .collect();
    assert_eq!(sols, [[5, 3, 3, 2], [6, 4, 8, 2]]);

    let (mut a, mut b) = (runs[0].clone(), runs[1].clone());
    strip_timing(&mut a);
    strip_timing(&mut b);
    for r in [&mut a, &mut b] {
        let cfg = r["config"].as_object_mut().unwrap();
        cfg.remove("jobs");
        cfg.remove("output");
    }
    assert_eq!(a, b);
}
