use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const THREE_BY_THREE: &str = r#"{"rows":3,"cols":3,"dim":2,"payoffs":[[[5,0],[-1,-5],[4,-4]],[[2,-2],[2,-7],[2,2]],[[0,-6],[6,-2],[-2,4]]]}"#;
const UNIT: &str = r#"{"rows":2,"cols":2,"dim":2,"payoffs":[[[1,0],[0,0]],[[0,1],[1,0]]]}"#;
const SPLIT: &str = r#"{"rows":2,"cols":2,"dim":2,"payoffs":[[[0,0],[4,4]],[[3,1],[1,3]]]}"#;

fn vpgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vpgame")).args(args).output().expect("binary runs")
}

fn game(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn random_game_files_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = vpgame(&["random", "--rows", "3", "--cols", "3", "--dim", "3", "--seed", "7", "--output", s(out)]);
        assert!(o.status.success());
    }
    let bytes = fs::read(&a).unwrap();
    assert_eq!(bytes, fs::read(&b).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(v["rows"], 3);
    assert_eq!(v["payoffs"].as_array().unwrap().len(), 3);
}

#[test]
fn unit_game_pair_is_strong_set_shapley() {
    let dir = TempDir::new().unwrap();
    let g = game(&dir, "g.json", UNIT);
    let out = stdout(&vpgame(&["check", s(&g), "--pair", "1,0;1,0", "--format", "table"]));
    assert_eq!(out.trim(), "strong set Shapley equilibrium");
    let out = stdout(&vpgame(&["check", s(&g), "--pair", "1,0;3/4,1/4", "--format", "table"]));
    assert_eq!(out.trim(), "set relation equilibrium");
}

#[test]
fn check_single_strategy_reports_improvement() {
    let dir = TempDir::new().unwrap();
    let g = game(&dir, "g.json", UNIT);
    let out = stdout(&vpgame(&["check", s(&g), "--p", "0,1"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"], "not minimal");
    assert_eq!(v["certificate"]["optimal"], false);
    assert_eq!(v["certificate"]["improving"]["rational"], serde_json::json!(["1", "0"]));
}

#[test]
fn three_by_three_equilibria_csv() {
    let dir = TempDir::new().unwrap();
    let g = game(&dir, "g.json", THREE_BY_THREE);
    let out = stdout(&vpgame(&["equilibria", s(&g), "--step-row", "1/10", "--step-col", "1/5", "--format", "csv"]));
    let mut reader = csv::Reader::from_reader(out.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let strong: Vec<(String, String)> =
        rows.iter().filter(|r| &r[2] == "strong").map(|r| (r[0].to_string(), r[1].to_string())).collect();
    assert_eq!(
        strong,
        vec![("2/5 0 3/5".to_string(), "0 0 1".to_string()), ("1/2 0 1/2".to_string(), "0 0 1".to_string())]
    );
    // every expected pair is listed
    for (p, q) in [
        ("2/5 0 3/5", "0 0 1"),
        ("1/2 0 1/2", "0 0 1"),
        ("1/2 0 1/2", "1/5 0 4/5"),
        ("1/2 0 1/2", "2/5 0 3/5"),
        ("3/5 0 2/5", "0 0 1"),
        ("3/5 0 2/5", "1/5 0 4/5"),
        ("3/5 0 2/5", "2/5 0 3/5"),
        ("7/10 0 3/10", "0 0 1"),
        ("7/10 0 3/10", "1/5 0 4/5"),
        ("7/10 0 3/10", "2/5 0 3/5"),
    ] {
        assert!(rows.iter().any(|r| &r[0] == p && &r[1] == q), "missing ({p}) ({q})");
    }
}

#[test]
fn reports_embed_config_and_ignore_worker_count() {
    let dir = TempDir::new().unwrap();
    let g = game(&dir, "g.json", SPLIT);
    let one = stdout(&vpgame(&["solve", s(&g), "--step-row", "1/12", "--workers", "1"]));
    let many = stdout(&vpgame(&["solve", s(&g), "--step-row", "1/12", "--workers", "4"]));
    assert_eq!(one, many);
    let v: serde_json::Value = serde_json::from_str(&one).unwrap();
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config"]["command"], "solve");
    assert_eq!(v["config"]["step_row"], "1/12");
    assert_eq!(v["fronts"][0]["optimal_count"], 5);
    assert_eq!(v["fronts"][1]["optimal_count"], 6);
}

#[test]
fn poss_and_plot_outputs() {
    let dir = TempDir::new().unwrap();
    let g = game(&dir, "g.json", SPLIT);
    let v: serde_json::Value = serde_json::from_str(&stdout(&vpgame(&["poss", s(&g)]))).unwrap();
    assert_eq!(v["players"][0]["image"]["vertices"].as_array().unwrap().len(), 2);
    assert_eq!(v["players"][0]["gap"]["violations"].as_array().unwrap().len(), 0);
    let plot: serde_json::Value =
        serde_json::from_str(&stdout(&vpgame(&["plot", s(&g), "--p", "1/3,2/3", "--q", "1/2,1/2"]))).unwrap();
    let labels: Vec<&str> = plot.as_array().unwrap().iter().map(|i| i["label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["V_I(1/3 2/3)", "V_II(1/2 1/2)", "W_I", "W_II"]);
    assert_eq!(plot[0]["orientation"], "LowerSet");
    assert_eq!(plot[2]["orientation"], "UpperSet");
}

#[test]
fn input_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let bad = game(&dir, "bad.json", "{not json");
    let shape = game(&dir, "shape.json", r#"{"rows":2,"cols":2,"dim":2,"payoffs":[[[1,0],[0,0]]]}"#);
    let g = game(&dir, "g.json", UNIT);
    let missing = dir.path().join("missing.json");
    for args in [
        vec!["solve", s(&bad)],
        vec!["solve", s(&shape)],
        vec!["solve", s(&missing)],
        vec!["solve", s(&g), "--step-row", "1/0"],
        vec!["solve", s(&g), "--tol", "0"],
        vec!["check", s(&g), "--p", "1,1"],
        vec!["check", s(&g), "--p", "1,0,0"],
        vec!["plot", s(&game(&dir, "k3.json", r#"{"rows":1,"cols":1,"dim":3,"payoffs":[[[1,2,3]]]}"#))],
        vec!["solve"],
    ] {
        let o = vpgame(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}
