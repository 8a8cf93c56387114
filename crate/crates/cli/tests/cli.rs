use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fcgboost(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fcgboost"))
        .args(args)
        .env("FCGBOOST_OUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn rows(stdout: &[u8]) -> Vec<Value> {
    String::from_utf8_lossy(stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("json line"))
        .collect()
}

fn assert_provenance(row: &Value) {
    assert!(row["config_digest"].as_str().is_some_and(|d| d.len() == 16), "{row}");
    assert!(row["seed"].is_u64(), "{row}");
    assert!(row["rep"].is_u64(), "{row}");
}

fn data_rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().skip(1).map(str::to_string).collect()
}

#[test]
fn synth_writes_requested_rows_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("train.csv");
    let out = fcgboost(
        &["synth", "--m", "1000", "--noise", "uniform:0.3", "--seed", "1", "--output", file.to_str().unwrap()],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(data_rows(&file).len(), 1000);
    assert!(dir.path().join("train.csv.meta").exists());
    let row = &rows(&out.stdout)[0];
    assert_provenance(row);
    assert_eq!(row["rows"], 1000);
}

#[test]
fn synth_outlier_noise_is_near_seventeen_percent() {
    let dir = tempfile::tempdir().unwrap();
    let out = fcgboost(&["synth", "--m", "1000", "--noise", "outlier:0.3,0.4"], dir.path());
    assert!(out.status.success());
    let realized = rows(&out.stdout)[0]["realized_noise"].as_f64().unwrap();
    assert!((realized - 0.174).abs() < 0.03, "realized noise {realized}");
}

#[test]
fn invalid_noise_ratio_fails_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.csv");
    let out = fcgboost(
        &["synth", "--noise", "outlier:0.3,1.5", "--output", file.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(!file.exists());
    assert!(String::from_utf8_lossy(&out.stderr).contains("ratio"));
}

#[test]
fn exit_codes_separate_usage_from_runtime_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fcgboost(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(fcgboost(&["--version"], dir.path()).status.code(), Some(0));
    assert_eq!(fcgboost(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(fcgboost(&["compare", "--axis", "colors"], dir.path()).status.code(), Some(1));
    assert_eq!(fcgboost(&["fit", "--loss", "logistic"], dir.path()).status.code(), Some(1));
    let missing = dir.path().join("missing.json");
    let out = fcgboost(&["eval", "--model", missing.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

const SMALL: &[&str] = &["--m", "200", "--n", "100", "--noise", "uniform:0.1", "--seed", "5"];

fn with(base: &[&str], extra: &[&str]) -> Vec<String> {
    base.iter().chain(extra).map(|s| s.to_string()).collect()
}

fn run(args: &[String], out: &Path) -> Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let o = fcgboost(&refs, out);
    assert!(o.status.success(), "{:?}: {}", args, String::from_utf8_lossy(&o.stderr));
    o
}

#[test]
fn fit_then_eval_reproduces_the_test_error() {
    let dir = tempfile::tempdir().unwrap();
    let fit = run(&with(&["fit"], SMALL), dir.path());
    let fit_row = &rows(&fit.stdout)[0];
    assert_provenance(fit_row);
    let model = dir.path().join("model.json");
    assert!(model.exists());
    assert!(dir.path().join("trace_fit_rep0.csv").exists());

    let eval = run(&with(&["eval", "--model", model.to_str().unwrap()], &[]), dir.path());
    let eval_row = &rows(&eval.stdout)[0];
    assert_provenance(eval_row);
    assert_eq!(eval_row["config_digest"], fit_row["config_digest"]);
    assert_eq!(eval_row["test_error"], fit_row["test_error"]);
    assert_eq!(eval_row["samples"], 200);

    let log = fs::read_to_string(dir.path().join("metrics.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 2);
}

#[test]
fn refitting_with_the_same_config_gives_the_same_row() {
    let dir = tempfile::tempdir().unwrap();
    let first = run(&with(&["fit"], SMALL), dir.path());
    let second = run(&with(&["fit"], SMALL), dir.path());
    assert_eq!(first.stdout, second.stdout);
    let other = run(&with(&["fit", "--rep", "1"], SMALL), dir.path());
    assert_ne!(first.stdout, other.stdout);
}

#[test]
fn empty_model_predicts_the_positive_class() {
    let dir = tempfile::tempdir().unwrap();
    let fit = run(&with(&["fit", "--k", "0"], SMALL), dir.path());
    assert_eq!(rows(&fit.stdout)[0]["k"], 0);
    let model = dir.path().join("model.json");
    let eval = run(&with(&["eval", "--model", model.to_str().unwrap()], &[]), dir.path());
    let err = rows(&eval.stdout)[0]["test_error"].as_f64().unwrap();

    // the same test sample written by synth
    let test = dir.path().join("test.csv");
    run(
        &with(&["synth", "--part", "test", "--output", test.to_str().unwrap()], SMALL),
        dir.path(),
    );
    let lines = data_rows(&test);
    let negatives = lines.iter().filter(|l| l.ends_with(",-1")).count();
    assert_eq!(err, negatives as f64 / lines.len() as f64);
}

#[test]
fn eval_on_a_saved_dataset_file() {
    let dir = tempfile::tempdir().unwrap();
    run(&with(&["fit"], SMALL), dir.path());
    let test = dir.path().join("test.csv");
    run(
        &with(&["synth", "--part", "test", "--output", test.to_str().unwrap()], SMALL),
        dir.path(),
    );
    let model = dir.path().join("model.json");
    let from_file = run(
        &["eval", "--model", model.to_str().unwrap(), "--data", test.to_str().unwrap()].map(String::from),
        dir.path(),
    );
    let regenerated = run(&["eval", "--model", model.to_str().unwrap()].map(String::from), dir.path());
    assert_eq!(
        rows(&from_file.stdout)[0]["test_error"],
        rows(&regenerated.stdout)[0]["test_error"]
    );
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(&cfg, "# small run\nm = 300\nseed = 9\nnoise = uniform:0.2\n").unwrap();
    let out = run(
        &["show-config", "--config", cfg.to_str().unwrap(), "--seed", "4"].map(String::from),
        dir.path(),
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("m = 300\n"));
    assert!(text.contains("seed = 4\n"));
    assert!(text.contains("noise = uniform:0.2\n"));
    assert!(text.contains(&format!("out = {}\n", dir.path().display())));

    fs::write(&cfg, "m = 300\nwidth = 2\n").unwrap();
    let bad = fcgboost(&["show-config", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn printed_config_reads_back_to_the_same_digest() {
    let dir = tempfile::tempdir().unwrap();
    let args = with(&["show-config", "--kernel", "gauss:0.5,relu", "--k", "3,6"], SMALL);
    let text = String::from_utf8(run(&args, dir.path()).stdout).unwrap();
    let cfg = dir.path().join("round.cfg");
    fs::write(&cfg, &text).unwrap();
    let again = String::from_utf8(
        run(&["show-config", "--config", cfg.to_str().unwrap()].map(String::from), dir.path()).stdout,
    )
    .unwrap();
    assert_eq!(text, again);
}

#[test]
fn compare_k_with_one_value_gives_one_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &with(&["compare", "--axis", "k", "--k", "13", "--reps", "2", "--kernel", "gauss:0.5"], SMALL),
        dir.path(),
    );
    let printed = rows(&out.stdout);
    assert_eq!(printed.len(), 2);
    for (rep, row) in printed.iter().enumerate() {
        assert_provenance(row);
        assert_eq!(row["rep"], rep);
        assert_eq!(row["cell"], "13");
    }
    let table = fs::read_to_string(dir.path().join("compare_k.csv")).unwrap();
    let cells: std::collections::BTreeSet<&str> =
        table.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(cells.into_iter().collect::<Vec<_>>(), ["13"]);
    assert!(dir.path().join("trace_k.csv").exists());
}

#[test]
fn compare_schemes_and_solvers_emit_every_cell() {
    let dir = tempfile::tempdir().unwrap();
    let schemes = run(
        &with(
            &[
                "compare", "--axis", "schemes", "--reps", "1", "--kernel", "gauss:0.5", "--fcg-steps", "20",
                "--baseline-steps", "100",
            ],
            SMALL,
        ),
        dir.path(),
    );
    let methods: Vec<String> = rows(&schemes.stdout)
        .iter()
        .map(|r| r["cell"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(methods, ["fcg", "orig", "shrinkage", "epsilon"]);

    let solvers = run(
        &with(&["compare", "--axis", "solvers", "--reps", "1", "--k", "5", "--gd-iters", "200"], SMALL),
        dir.path(),
    );
    let printed = rows(&solvers.stdout);
    assert_eq!(printed.len(), 2);
    assert_eq!(printed[0]["cell"], "admm");
    assert_eq!(printed[1]["cell"], "gd");
    let trace = fs::read_to_string(dir.path().join("trace_solvers.csv")).unwrap();
    assert!(trace.starts_with("cell,rep,iter,objective,residual,seconds"));
}

#[test]
fn compare_losses_in_single_precision() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &with(
            &["compare", "--axis", "losses", "--reps", "1", "--losses", "squared-hinge,square", "--precision", "f32"],
            SMALL,
        ),
        dir.path(),
    );
    let printed = rows(&out.stdout);
    assert_eq!(printed.len(), 2);
    assert!(printed.iter().all(|r| r["precision"] == "f32"));
}

#[test]
fn gauss_fit_at_thirty_percent_noise_is_accurate() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["fit", "--noise", "uniform:0.3", "--seed", "42"].map(String::from),
        dir.path(),
    );
    let err = rows(&out.stdout)[0]["test_error"].as_f64().unwrap();
    assert!((0.005..=0.09).contains(&err), "test error {err}");
}
