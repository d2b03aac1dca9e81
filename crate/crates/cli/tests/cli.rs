use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_lpm-lab");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).args(args).current_dir(dir).env_remove("LPM_LAB_THREADS").output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn sample_rect(dir: &Path, n: &str) -> Output {
    run(dir, &["sample", "--model", "rect", "--d", "2", "--p", "0.5", "--link", "poly:C=2,a=3", "--n", n, "--seed", "42", "--out", "g.json"])
}

#[test]
fn sample_writes_requested_size() {
    let dir = tempfile::tempdir().unwrap();
    let out = sample_rect(dir.path(), "500");
    assert!(out.status.success());
    let g = json(&dir.path().join("g.json"));
    assert_eq!(g["meta"]["n"], 500);
    assert_eq!(g["schema_version"], "1.0");
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("n=500") && err.contains("seed=42") && err.contains("edges="), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn rcm_is_rectangular_with_unit_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["sample", "--model", "rcm", "--link", "poly:C=2,a=3", "--n", "40", "--out", "g.json"]);
    assert!(out.status.success());
    let g = json(&dir.path().join("g.json"));
    assert_eq!(g["meta"]["d"], 1);
    assert_eq!(g["meta"]["p"], 1.0);
    assert_eq!(g["meta"]["seed"], 0);
}

#[test]
fn edge_list_has_header_and_ordered_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["sample", "--model", "gauss", "--d", "2", "--sigma2", "1", "--link", "logexp:tau=1", "--n", "30", "--out", "g.json", "--edge-list", "g.txt"],
    );
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("g.txt")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema_version 1.0 nodes 30"));
    let g = json(&dir.path().join("g.json"));
    let mut count = 0;
    for l in lines {
        let v: Vec<usize> = l.split(' ').map(|x| x.parse().unwrap()).collect();
        assert!(v[0] < v[1] && v[1] < 30);
        count += 1;
    }
    assert_eq!(count, g["edges"].as_array().unwrap().len());
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let missing_link = run(p, &["sample", "--model", "rect", "--d", "2", "--p", "0.5", "--n", "5", "--out", "g.json"]);
    assert_eq!(missing_link.status.code(), Some(2));
    let missing_p = run(p, &["sample", "--model", "rect", "--d", "2", "--link", "poly:C=2,a=3", "--n", "5", "--out", "g.json"]);
    assert_eq!(missing_p.status.code(), Some(2));
    let bad_link = run(p, &["sample", "--model", "rcm", "--link", "poly:C=0.5,a=3", "--n", "5", "--out", "g.json"]);
    assert_eq!(bad_link.status.code(), Some(2));
    let t_on_gauss = run(
        p,
        &["sample", "--model", "gauss", "--d", "1", "--sigma2", "1", "--T", "3", "--link", "logexp:tau=1", "--n", "5", "--out", "g.json"],
    );
    assert_eq!(t_on_gauss.status.code(), Some(2));
    assert_eq!(run(p, &["frobnicate"]).status.code(), Some(2));
    assert!(!p.join("g.json").exists());
}

#[test]
fn io_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["sample", "--model", "rcm", "--link", "poly:C=2,a=3", "--n", "5", "--out", "missing/dir/g.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fit_reports_errors_and_auto_bound() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(sample_rect(p, "500").status.success());
    let out = run(p, &["fit", "--graph", "g.json", "--G", "auto", "--restarts", "1", "--max-iters", "100", "--out", "f.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let f = json(&p.join("f.json"));
    let g = f["G"].as_f64().unwrap();
    assert!((g - 2.0 * 2f64.sqrt() * 500f64.powf(0.25)).abs() < 1e-12);
    for key in ["pos_err", "dist_err", "prob_err"] {
        assert!(f["errors"][key].as_f64().unwrap().is_finite());
    }
    assert_eq!(f["Z_hat"].as_array().unwrap().len(), 500);
    assert_eq!(f["schema_version"], "1.0");
}

#[test]
fn fit_with_explicit_bound_and_edge_only_graph() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let bare = r#"{"schema_version":"1.0","meta":{"n":4},"edges":[[0,1],[1,2],[2,3]]}"#;
    fs::write(p.join("bare.json"), bare).unwrap();
    let auto = run(p, &["fit", "--graph", "bare.json", "--link", "poly:C=2,a=3", "--dim", "1", "--G", "auto", "--out", "f.json"]);
    assert_eq!(auto.status.code(), Some(2));
    let fixed = run(p, &["fit", "--graph", "bare.json", "--link", "poly:C=2,a=3", "--dim", "1", "--G", "3", "--out", "f.json"]);
    assert!(fixed.status.success());
    let f = json(&p.join("f.json"));
    assert!(f.get("errors").is_none());
    assert_eq!(f["G"], 3.0);
    let no_link = run(p, &["fit", "--graph", "bare.json", "--dim", "1", "--G", "3", "--out", "f.json"]);
    assert_eq!(no_link.status.code(), Some(2));
    let bad_g = run(p, &["fit", "--graph", "bare.json", "--link", "poly:C=2,a=3", "--dim", "1", "--G", "-1", "--out", "f.json"]);
    assert_eq!(bad_g.status.code(), Some(2));
}

#[test]
fn corrupted_or_future_files_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("bad.json"), "{\"schema_version\": \"1.0\", \"meta\": ").unwrap();
    let out = run(p, &["fit", "--graph", "bad.json", "--link", "poly:C=2,a=3", "--dim", "1", "--G", "2", "--out", "f.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("bad.json"));
    fs::write(p.join("v2.json"), r#"{"schema_version":"2.0","meta":{"n":2},"edges":[]}"#).unwrap();
    let out = run(p, &["fit", "--graph", "v2.json", "--link", "poly:C=2,a=3", "--dim", "1", "--G", "2", "--out", "f.json"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(p, &["fit", "--graph", "nowhere.json", "--link", "poly:C=2,a=3", "--dim", "1", "--G", "2", "--out", "f.json"]);
    assert_eq!(out.status.code(), Some(1));
}

const SPARSITY_PLAN: &str = r#"{"kind":"sparsity","seed":2,"replicates":4,"n_grid":[30,60,120],"models":[
    {"family":"rect","d":2,"p":0.5,"link":"poly:C=2,a=3"},
    {"family":"rcm","link":"poly:C=2,a=3"},
    {"family":"gauss","d":1,"sigma2":1.0,"link":"logexp:tau=1"}]}"#;

#[test]
fn sparsity_report_has_a_series_per_model_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("plan.json"), SPARSITY_PLAN).unwrap();
    assert!(run(p, &["exp", "sparsity", "--config", "plan.json", "--out", "a"]).status.success());
    assert!(run(p, &["exp", "sparsity", "--config", "plan.json", "--out", "b"]).status.success());
    for suffix in [".csv", ".summary.json", ".plot.csv"] {
        let a = fs::read(p.join(format!("a{suffix}"))).unwrap();
        let b = fs::read(p.join(format!("b{suffix}"))).unwrap();
        assert_eq!(a, b, "{suffix}");
    }
    let plot = fs::read_to_string(p.join("a.plot.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(plot.as_bytes());
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["schema_version", "x", "y", "series"]);
    let series: std::collections::BTreeSet<String> = rdr.records().map(|r| r.unwrap()[3].to_string()).collect();
    assert_eq!(series.len(), 3);
    let rows = fs::read_to_string(p.join("a.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 3 * 3 * 4);
    let summary = json(&p.join("a.summary.json"));
    assert_eq!(summary["kind"], "sparsity");
    assert_eq!(summary["schema_version"], "1.0");
}

#[test]
fn summary_means_recompute_from_rows() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("plan.json"), SPARSITY_PLAN).unwrap();
    assert!(run(p, &["exp", "sparsity", "--config", "plan.json", "--out", "s"]).status.success());
    let summary = json(&p.join("s.summary.json"));
    let text = fs::read_to_string(p.join("s.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    for model in summary["results"].as_array().unwrap() {
        let label = model["model"].as_str().unwrap();
        for m in model["means"].as_array().unwrap() {
            let n = m["n"].as_u64().unwrap().to_string();
            let edges: Vec<f64> = rows.iter().filter(|r| &r[1] == label && r[2] == n).map(|r| r[5].parse().unwrap()).collect();
            let mean = edges.iter().sum::<f64>() / edges.len() as f64;
            assert!((mean - m["mean_edges"].as_f64().unwrap()).abs() < 1e-9);
        }
    }
}

#[test]
fn invalid_plans_exit_2_with_every_violation() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let short = r#"{"kind":"sparsity","replicates":0,"n_grid":[10,20],"models":[{"family":"rcm","link":"poly:C=2,a=3"}]}"#;
    fs::write(p.join("short.json"), short).unwrap();
    let out = run(p, &["exp", "sparsity", "--config", "short.json", "--out", "x"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("length ≥ 3 for slope fits"), "{err}");
    assert!(err.contains("replicates must be positive"), "{err}");
    let wrong_kind = run(p, &["exp", "regularity", "--config", "short.json", "--out", "x"]);
    assert_eq!(wrong_kind.status.code(), Some(2));
    let unknown = run(p, &["exp", "graphex", "--config", "short.json", "--out", "x"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(!p.join("x.csv").exists());
}

#[test]
fn thread_cap_must_be_positive() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(BIN)
        .args(["sample", "--model", "rcm", "--link", "poly:C=2,a=3", "--n", "5", "--out", "g.json"])
        .current_dir(dir.path())
        .env("LPM_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
