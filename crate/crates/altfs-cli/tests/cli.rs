//! End-to-end tests of the `altfs` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn altfs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_altfs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Small margin-separable dataset: f0 decides the label, f1..f3 are noise.
fn write_dataset(dir: &Path) -> PathBuf {
    let mut csv = String::from("f0,f1,f2,f3,label\n");
    for i in 0..12 {
        let label = i % 2;
        let signal = if label == 1 { 0.8 + 0.01 * i as f64 } else { 0.1 + 0.01 * i as f64 };
        // constant within each label pair, so it carries no label information
        let noise = |p: usize| (((i / 2) * p * 31 + 7) % 10) as f64 / 10.0;
        csv.push_str(&format!(
            "{signal},{},{},{},{}\n",
            noise(1),
            noise(2),
            noise(3),
            if label == 1 { "yes" } else { "no" }
        ));
    }
    let path = dir.join("toy.csv");
    fs::write(&path, csv).unwrap();
    path
}

fn write_importance(dir: &Path, scores: &[(&str, f64)]) -> PathBuf {
    let mut csv = String::from("feature,score\n");
    for (name, score) in scores {
        csv.push_str(&format!("{name},{score}\n"));
    }
    let path = dir.join("importance.csv");
    fs::write(&path, csv).unwrap();
    path
}

fn example5_importance(dir: &Path) -> PathBuf {
    write_importance(
        dir,
        &[
            ("a", 9.0),
            ("b", 8.0),
            ("c", 7.0),
            ("d", 3.0),
            ("e", 2.0),
            ("f", 1.0),
        ],
    )
}

fn objective_values(json: &str) -> Vec<Option<f64>> {
    let rows: serde_json::Value = serde_json::from_str(json).unwrap();
    rows.as_array()
        .unwrap()
        .iter()
        .map(|row| row["objective_value"].as_f64())
        .collect()
}

#[test]
fn qualities_ranks_the_informative_feature_first() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path());
    let out_path = dir.path().join("q.csv");
    let out = altfs(&[
        "qualities",
        "--data",
        data.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let content = fs::read_to_string(&out_path).unwrap();
    let mut lines = content.lines();
    assert_eq!(lines.next(), Some("feature,score"));
    let scores: Vec<(String, f64)> = lines
        .map(|l| {
            let (name, value) = l.split_once(',').unwrap();
            (name.to_string(), value.parse().unwrap())
        })
        .collect();
    assert_eq!(scores.len(), 4);
    let best = scores
        .iter()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    assert_eq!(best.0, "f0");

    // the emitted file is itself a valid importance file
    let search = altfs(&[
        "search",
        "--objective",
        "importance",
        "--importance-file",
        out_path.to_str().unwrap(),
        "--method",
        "seq",
        "--k",
        "2",
        "--num-alternatives",
        "0",
        "--tau",
        "0.5",
    ]);
    assert!(search.status.success());
}

#[test]
fn qualities_abs_pearson_of_a_label_copy_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("copy,other,y\n");
    for i in 0..10 {
        let y = i % 2;
        csv.push_str(&format!("{y},{},{y}\n", i as f64 / 10.0));
    }
    let data = dir.path().join("copy.csv");
    fs::write(&data, csv).unwrap();
    let out = altfs(&[
        "qualities",
        "--data",
        data.to_str().unwrap(),
        "--measure",
        "abs-pearson",
    ]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let copy_line = text.lines().find(|l| l.starts_with("copy,")).unwrap();
    let score: f64 = copy_line.split_once(',').unwrap().1.parse().unwrap();
    assert!((score - 1.0).abs() < 1e-9);
}

#[test]
fn bad_path_exits_with_code_two() {
    let out = altfs(&["qualities", "--data", "/does/not/exist.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn incompatible_pairing_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path());
    let out = altfs(&[
        "search",
        "--data",
        data.to_str().unwrap(),
        "--objective",
        "mrmr",
        "--method",
        "rep",
        "--k",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn search_seq_reproduces_the_worked_chain() {
    let dir = tempfile::tempdir().unwrap();
    let imp = example5_importance(dir.path());
    let out = altfs(&[
        "search",
        "--objective",
        "importance",
        "--importance-file",
        imp.to_str().unwrap(),
        "--method",
        "seq",
        "--k",
        "3",
        "--num-alternatives",
        "2",
        "--tau",
        "0.5",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let values: Vec<f64> = objective_values(&stdout_str(&out))
        .into_iter()
        .flatten()
        .collect();
    assert_eq!(values, vec![24.0, 14.0, 12.0]);
}

#[test]
fn search_sim_sum_reaches_the_joint_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let imp = example5_importance(dir.path());
    let out = altfs(&[
        "search",
        "--objective",
        "importance",
        "--importance-file",
        imp.to_str().unwrap(),
        "--method",
        "sim-sum",
        "--k",
        "3",
        "--num-alternatives",
        "2",
        "--tau",
        "1/2",
    ]);
    assert!(out.status.success());
    let total: f64 = objective_values(&stdout_str(&out)).into_iter().flatten().sum();
    assert_eq!(total, 54.0);
}

#[test]
fn search_rep_matches_the_greedy_worked_instance() {
    let dir = tempfile::tempdir().unwrap();
    let imp = example5_importance(dir.path());
    let out = altfs(&[
        "search",
        "--objective",
        "importance",
        "--importance-file",
        imp.to_str().unwrap(),
        "--method",
        "rep",
        "--k",
        "2",
        "--num-alternatives",
        "2",
        "--tau",
        "0.5",
    ]);
    assert!(out.status.success());
    let values: Vec<f64> = objective_values(&stdout_str(&out))
        .into_iter()
        .flatten()
        .collect();
    assert_eq!(values, vec![17.0, 16.0, 12.0]);
}

#[test]
fn infeasible_search_succeeds_with_infeasible_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let imp = write_importance(dir.path(), &[("a", 4.0), ("b", 3.0), ("c", 2.0), ("d", 1.0)]);
    let out = altfs(&[
        "search",
        "--objective",
        "importance",
        "--importance-file",
        imp.to_str().unwrap(),
        "--method",
        "seq",
        "--k",
        "3",
        "--num-alternatives",
        "1",
        "--tau",
        "1.0",
    ]);
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(rows[0]["status"], "optimal");
    assert_eq!(rows[1]["status"], "infeasible");
    assert!(rows[1]["features"].is_null());
}

#[test]
fn benchmark_minimal_config_counts_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path());
    let config_path = dir.path().join("grid.conf");
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    let jsonl = dir.path().join("records.jsonl");
    fs::write(
        &config_path,
        format!(
            "# tiny grid\ndata = {}\ntarget = label\nobjectives = mi\nmethods = seq, rep\nk = 2\na = 1\ntau = 0.5\nfolds = 2\nseed = 0\njsonl = {}\n",
            data.display(),
            jsonl.display()
        ),
    )
    .unwrap();
    let run = |out: &Path| {
        let result = altfs(&[
            "benchmark",
            "--config",
            config_path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
        fs::read_to_string(out).unwrap()
    };
    let first = run(&out_a);
    let second = run(&out_b);
    assert_eq!(first, second, "rerun with the same seed must be byte-identical");

    let lines: Vec<&str> = first.lines().collect();
    // header + 2 methods x 2 folds x (a+1)=2 records
    assert_eq!(lines.len(), 1 + 8);
    assert!(lines[0].starts_with("dataset,fold,method,objective"));
    assert!(lines.iter().any(|l| l.contains(",seq,")));
    assert!(lines.iter().any(|l| l.contains(",rep,")));

    // the optional JSON-lines mirror holds one object per record
    let jsonl_text = fs::read_to_string(&jsonl).unwrap();
    assert_eq!(jsonl_text.lines().count(), 8);
    for line in jsonl_text.lines() {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(row["dataset_id"].is_string());
    }
}

#[test]
fn benchmark_config_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("bad.conf");
    fs::write(&config_path, "data = x.csv\nnota config line\n").unwrap();
    let out = altfs(&["benchmark", "--config", config_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "stderr: {err}");
}
