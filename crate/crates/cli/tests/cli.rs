//! End-to-end runs of the binary against the bundled configs.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pclab"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn tmp_dir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("pclab-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

#[test]
fn unknown_command_is_a_usage_error() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_is_a_usage_error() {
    let out = bin().args(["ends", "classify"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn domain_errors_exit_one() {
    let dir = tmp_dir("badgraph");
    let graph = dir.join("g.json");
    std::fs::create_dir_all(&dir).unwrap();
    // disconnected graph: bottleneck must fail with a domain error
    std::fs::write(&graph, r#"{"vertices": 4, "edges": [[0,1],[2,3]]}"#).unwrap();
    let out = bin()
        .args(["--out", dir.to_str().unwrap(), "bottleneck", "--graph", graph.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bottleneck_on_bundled_path_graph() {
    let dir = tmp_dir("p10");
    let out = bin()
        .args([
            "--out",
            dir.to_str().unwrap(),
            "bottleneck",
            "--graph",
            config("p10.json").to_str().unwrap(),
            "--all-pairs",
            "true",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("bottleneck.json")).unwrap())
            .unwrap();
    assert_eq!(doc["deltaUnits"], 1, "paths have the minimal bottleneck constant");
    assert!(dir.join("bottleneck_pairs.csv").exists());
}

#[test]
fn ends_classify_reports_bushy_f2() {
    let dir = tmp_dir("f2");
    let out = bin()
        .args([
            "--config",
            config("f2_bushy.conf").to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            "ends",
            "classify",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.join("ends_report.json")).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["classification"], "bushy");
    assert!(doc["positiveCount"].as_u64().unwrap() >= 2);
    assert!(doc["meta"]["config_hash"].is_string());
}

#[test]
fn ends_classify_reports_uniform_z2() {
    let dir = tmp_dir("z2");
    let out = bin()
        .args([
            "--config",
            config("z2_uniform.conf").to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            "ends",
            "classify",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("ends_report.json")).unwrap())
            .unwrap();
    assert_eq!(doc["classification"], "consistent-with-uniform");
    assert_eq!(doc["positiveCount"], 1);
}

#[test]
fn x_verify_on_the_line() {
    let dir = tmp_dir("zx");
    let out = bin()
        .args([
            "--config",
            config("z_line.conf").to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            "x",
            "verify",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("x_verify.json")).unwrap())
            .unwrap();
    assert_eq!(doc["orbitGap"], 1);
    assert_eq!(doc["intersectViolations"], 0);
    assert_eq!(doc["tbottleViolations"], 0);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let d1 = tmp_dir("rep1");
    let d2 = tmp_dir("rep2");
    for d in [&d1, &d2] {
        let out = bin()
            .args([
                "--config",
                config("f2_bushy.conf").to_str().unwrap(),
                "--out",
                d.to_str().unwrap(),
                "slabtree",
                "build",
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["slabtree.json", "slabtree.dot"] {
        let a = std::fs::read(d1.join(name)).unwrap();
        let b = std::fs::read(d2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn farey_commands() {
    let dir = tmp_dir("farey");
    let out = bin()
        .args(["--out", dir.to_str().unwrap(), "farey", "gen", "--Q", "5"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("farey.json")).unwrap()).unwrap();
    assert_eq!(doc["qBound"], 5);

    let out = bin()
        .args(["--out", dir.to_str().unwrap(), "farey", "orbit", "--Q", "20", "--len", "3"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("farey_orbit.json")).unwrap())
            .unwrap();
    assert!(doc["diameter"].as_u64().unwrap() > 0);
}
