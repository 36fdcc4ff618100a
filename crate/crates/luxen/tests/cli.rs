use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn luxen() -> Command {
    Command::new(env!("CARGO_BIN_EXE_luxen"))
}

fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn employees() -> String {
    let mut s = String::from("Age,Department,Salary,Education\n");
    for i in 0..80 {
        let dept = ["Sales", "R&D", "HR"][i % 3];
        s.push_str(&format!("{},{dept},{},{}\n", 20 + i % 50, 3000 + (i * 37) % 900 + i * 10, i % 5 + 1));
    }
    s
}

#[test]
fn recommend_writes_specs_and_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "emp.csv", &employees());
    let out = dir.path().join("specs");
    let status = luxen()
        .args(["recommend", input.to_str().unwrap(), "--intent", "Age,Salary", "--out", out.to_str().unwrap(), "--k", "3"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let manifest: Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["k"], 3);
    let vises = manifest["vises"].as_array().unwrap();
    assert_eq!(vises[0]["action"], "Current");
    assert_eq!(vises[0]["file"], "current-0.json");
    for v in vises {
        let spec: Value = serde_json::from_slice(&std::fs::read(out.join(v["file"].as_str().unwrap())).unwrap()).unwrap();
        assert!(spec["mark"].is_object(), "{spec}");
        assert!(spec["data"]["values"].is_array());
        assert!(v["rank"].as_u64().unwrap() < 3 || v["action"] == "Current");
    }
    assert!(vises.iter().any(|v| v["action"] == "Enhance"));
}

#[test]
fn overview_without_intent() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "emp.csv", &employees());
    let out = dir.path().join("o");
    let status = luxen().args(["recommend", input.to_str().unwrap(), "--out", out.to_str().unwrap()]).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let manifest: Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["mode"], "overview");
    let actions: std::collections::BTreeSet<&str> =
        manifest["vises"].as_array().unwrap().iter().map(|v| v["action"].as_str().unwrap()).collect();
    assert!(actions.contains("Correlation") && actions.contains("Distribution") && actions.contains("Occurrence"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let run = |args: &[&str]| luxen().args(args).output().unwrap();

    let missing = run(&["recommend", "/definitely/not/here.csv", "--out", out.to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(1));

    let input = write(dir.path(), "emp.csv", &employees());
    let bad = run(&["recommend", input.to_str().unwrap(), "--intent", "Age{channel=z}", "--out", out.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("parse error"));

    let typo = run(&["recommend", input.to_str().unwrap(), "--intent", "Agee", "--out", out.to_str().unwrap()]);
    assert_eq!(typo.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&typo.stderr).contains("did you mean Age"));

    let dup = write(dir.path(), "dup.csv", "a,b,a\n1,2,3\n");
    let r = run(&["recommend", dup.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("duplicate header name: a"));

    let r = run(&["recommend", input.to_str().unwrap(), "--k", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn environment_configures_the_engine() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "emp.csv", &employees());
    let out = dir.path().join("e");
    let status = luxen()
        .env("LUXEN_TOPK", "2")
        .args(["recommend", input.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let manifest: Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["k"], 2);
    let r = luxen().env("LUXEN_SAMPLE_CAP", "nope").args(["recommend", input.to_str().unwrap()]).output().unwrap();
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn bench_runs_small() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("bench.json");
    let r = luxen()
        .args(["bench", "--rows", "2000", "--cols", "8", "--levels", "no-opt,all-opt", "--json", json.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let report: Value = serde_json::from_slice(&std::fs::read(json).unwrap()).unwrap();
    assert_eq!(report["report"]["levels"].as_array().unwrap().len(), 2);
}
