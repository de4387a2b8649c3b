use std::path::Path;
use std::process::{Command, Output};

fn citesbm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_citesbm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

const SMALL: [&str; 6] = [
    "--synth.n_communities",
    "4",
    "--synth.amplitude",
    "50",
    "--train.epochs",
    "20",
];

/// Synthesize a small corpus into `dir/data`; return corpus overrides.
fn small_corpus(dir: &Path) -> Vec<String> {
    let data = dir.join("data");
    let mut args = vec!["synth".to_string(), "--run.out_dir".into(), s(&data)];
    args.extend(SMALL.iter().map(|a| a.to_string()));
    let out = Command::new(env!("CARGO_BIN_EXE_citesbm")).args(&args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["patents.csv", "citations.csv", "labels.csv", "truth_series.csv"] {
        assert!(data.join(f).exists(), "missing {f}");
    }
    let mut o = vec![
        "--corpus.patents".to_string(),
        s(&data.join("patents.csv")),
        "--corpus.citations".into(),
        s(&data.join("citations.csv")),
    ];
    o.extend(SMALL.iter().map(|a| a.to_string()));
    o
}

fn run_stage(stage: &str, out: &Path, corpus: &[String]) {
    let mut args = vec![stage.to_string(), "--run.out_dir".into(), s(out)];
    args.extend(corpus.iter().cloned());
    let o = Command::new(env!("CARGO_BIN_EXE_citesbm")).args(&args).output().unwrap();
    assert!(o.status.success(), "{stage}: {}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(citesbm(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(citesbm(&["train", "--sbm.no_such_key", "3"]).status.code(), Some(1));
    assert_eq!(citesbm(&["train", "--train.epochs", "many"]).status.code(), Some(1));
    assert_eq!(citesbm(&["train", "--train.epochs"]).status.code(), Some(1));
    assert_eq!(citesbm(&["--help"]).status.code(), Some(0));
}

#[test]
fn stub_option_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = citesbm(&[
        "ingest",
        "--run.out_dir",
        &s(dir.path()),
        "--corpus.keep_dangling_as_stubs",
        "true",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = citesbm(&["evaluate", "--run.out_dir", &s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("train"));
    let out = citesbm(&["cluster", "--run.out_dir", &s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    std::fs::write(&cfg, "[train]\nepochs = 7\n[bogus]\nx = 1\n").unwrap();
    let out = citesbm(&["-c", &s(&cfg), "train", "--run.out_dir", &s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("run.ini:4"));
}

#[test]
fn pipeline_equals_stage_by_stage() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run_stage("pipeline", &a, &corpus);
    for stage in ["ingest", "cluster", "series", "train", "evaluate"] {
        run_stage(stage, &b, &corpus);
    }
    for f in [
        "graph.dot",
        "ingest.json",
        "hierarchy.json",
        "clustered.dot",
        "series.csv",
        "report.json",
        "report.csv",
        "predictions.csv",
    ] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f} differs"
        );
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("report.json")).unwrap()).unwrap();
    assert!(report["aggregate"]["n_communities"].as_u64().unwrap() >= 1);
    assert_eq!(report["config"]["train.epochs"], "20");
    let preds = std::fs::read_to_string(a.join("predictions.csv")).unwrap();
    let header = preds.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "community_id,year,truth,train_pred,test_pred");
}
