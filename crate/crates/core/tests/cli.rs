//! End-to-end runs of the `submod-auction` binary.

use std::process::{Command, Output};

use submod_auction::harness::dataset::InstanceFile;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_submod-auction")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&bin(&[])), 2);
    assert_eq!(code(&bin(&["verify", "no-such-suite"])), 2);
    assert_eq!(code(&bin(&["lowerbound", "--l", "10", "--epsilon", "0.1"])), 2);
    assert_eq!(code(&bin(&["experiment", "--config", "/nonexistent.json"])), 2);
}

#[test]
fn verify_passes_and_control_fails() {
    let o = bin(&["verify", "nas", "--trials", "40", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["failures"], 0);

    let o = bin(&["verify", "control-first-price", "--trials", "10"]);
    assert_eq!(code(&o), 1);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(!report["counterexamples"].as_array().unwrap().is_empty());
}

#[test]
fn guarantees_report_has_beta_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let o = bin(&["verify", "guarantees", "--trials", "20", "--report", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let tables = report["beta_tables"].as_array().unwrap();
    assert_eq!(tables[0][0], "distorted");
    assert_eq!(tables[0][1].as_array().unwrap().len(), 21);
}

#[test]
fn lowerbound_reports_both_oracles() {
    let o = bin(&["lowerbound", "--l", "10"]);
    assert_eq!(code(&o), 0);
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["opt_welfare"], 9.0);
    assert!(r["exact"]["welfare"].as_f64().unwrap() <= 2.0);
    assert!(r["cost_scaled"]["welfare"].as_f64().unwrap() >= 4.0);
}

#[test]
fn gen_instance_round_trips() {
    let o = bin(&["gen-instance", "--n", "7", "--seed", "3"]);
    assert_eq!(code(&o), 0);
    let f: InstanceFile = serde_json::from_slice(&o.stdout).unwrap();
    let (_, costs) = f.into_parts().unwrap();
    assert_eq!(costs.len(), 7);
}

#[test]
fn experiment_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"synthetic": {"sources": 300, "targets": 120, "mean_out_degree": 6, "seed": 4},
            "n": [12], "s": [1, 2], "instances": 4, "seed": 9,
            "mechanisms": ["sealed-bid", "posted-price", "vcg"],
            "rules": ["greedy-margin", "distorted"]}"#,
    )
    .unwrap();
    let run = |threads: &str, out: &str| {
        let path = dir.path().join(out);
        let o = bin(&["experiment", "--config", cfg.to_str().unwrap(), "--threads", threads, "--output", path.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read_to_string(path).unwrap()
    };
    let a = run("1", "a.csv");
    let b = run("4", "b.csv");
    assert_eq!(a, b);
    assert!(a.starts_with("schema,instance_id,"));
    // 2 s values × 4 instances × (2 sealed-bid + 2 posted-price + 1 vcg) rows.
    assert_eq!(a.lines().count(), 1 + 2 * 4 * 5);
    assert!(dir.path().join("a.summary.csv").exists());

    // VCG rows reach the brute-force optimum, so no rule beats them.
    let mut rows = csv::Reader::from_reader(a.as_bytes());
    let recs: Vec<csv::StringRecord> = rows.records().map(Result::unwrap).collect();
    let welfare = |r: &csv::StringRecord| r[8].parse::<f64>().unwrap();
    // Distorted is not online-capable, so its posted-price rows are skipped.
    assert!(recs.iter().any(|r| &r[6] == "posted-price" && &r[7] == "distorted" && r[8].is_empty()));
    for vcg in recs.iter().filter(|r| &r[6] == "vcg") {
        for other in recs.iter().filter(|r| r[1] == vcg[1] && !r[8].is_empty()) {
            assert!(welfare(other) <= welfare(vcg) + 1e-9);
        }
    }
}

#[test]
fn bench_reports_fewer_lazy_queries() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bench.json");
    std::fs::write(
        &cfg,
        r#"{"synthetic": {"sources": 500, "targets": 200, "mean_out_degree": 8, "seed": 1}, "n": [80], "include_vcg": true}"#,
    )
    .unwrap();
    let o = bin(&["bench", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let recs: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    let q = |v: &str| recs.iter().find(|r| &r[3] == v).unwrap()[5].parse::<u64>().unwrap();
    assert!(q("allocation-lazy") < q("allocation-naive"));
    assert!(recs.iter().any(|r| &r[3] == "vcg" && !r[7].is_empty()));
}
