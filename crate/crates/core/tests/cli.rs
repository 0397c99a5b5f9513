mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clarifyir::cli::dispatch;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clarifyir"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Copies the shipped fixture into `dir` and returns the path of `config`.
fn staged(dir: &Path, config: &str) -> PathBuf {
    for entry in std::fs::read_dir(common::fixture_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.is_file() {
            std::fs::copy(&path, dir.join(path.file_name().unwrap())).unwrap();
        }
    }
    dir.join(format!("{config}.json"))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn usage_errors_exit_2() {
    let o = bin(&["run"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--config"), "{}", stderr(&o));
    assert_eq!(bin(&["stats", "--config", "c.json", "--bogus"]).status.code(), Some(2));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(dispatch(["clarifyir"]), 2);
    assert_eq!(dispatch(["clarifyir", "--help"]), 0);
}

#[test]
fn runtime_errors_exit_1_with_code_prefix() {
    let o = bin(&["stats", "--config", "/definitely/not/here.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error[E_IO]: "), "{}", stderr(&o));
    assert_eq!(stderr(&o).lines().count(), 1);

    let tmp = tempfile::tempdir().unwrap();
    let cfg = staged(tmp.path(), "gen_rerank_text_only");
    let o = bin(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error[E_MISSING_ARTIFACT]: "), "{}", stderr(&o));

    let bad = tmp.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"paths": {"dataset": "d", "corpus": "c", "qrels": "q", "output_dir": "o"}, "beam": 3}"#,
    )
    .unwrap();
    let o = bin(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error[E_PARSE]: "), "{}", stderr(&o));
}

#[test]
fn split_twice_gives_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = staged(tmp.path(), "original_query");
    let split = tmp.path().join("split.json");
    std::fs::remove_file(&split).unwrap();
    assert_eq!(
        bin(&["split", "--config", cfg.to_str().unwrap()]).status.code(),
        Some(0)
    );
    let first = std::fs::read(&split).unwrap();
    assert_eq!(
        bin(&["split", "--config", cfg.to_str().unwrap()]).status.code(),
        Some(0)
    );
    assert_eq!(std::fs::read(&split).unwrap(), first);
    assert_eq!(first, std::fs::read(common::fixture_dir().join("split.json")).unwrap());
}

#[test]
fn stats_prints_dataset_and_answer_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = staged(tmp.path(), "original_query");
    let o = bin(&["stats", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    for line in [
        "# topics\t10",
        "# facets\t50",
        "# all questions\t100",
        "# set 1 questions\t50",
        "# images\t300",
        "# answers\t100",
    ] {
        assert!(out.contains(line), "{line} missing from\n{out}");
    }
    assert!(out.contains("Vocab. size\t"));
}

#[test]
fn staged_commands_then_evaluate_and_compare() {
    let tmp = tempfile::tempdir().unwrap();
    let mm = staged(tmp.path(), "gen_rerank_multimodal");
    let mm = mm.to_str().unwrap();
    for cmd in [
        "split",
        "index",
        "identifiers",
        "train-scorer",
        "weak-label",
        "train-classifier",
        "retrieve",
        "evaluate",
    ] {
        let o = bin(&[cmd, "--config", mm]);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", stderr(&o));
    }
    let out = tmp.path().join("out");
    for f in [
        "artifacts/index.idx",
        "artifacts/identifiers.doc_k.jsonl",
        "artifacts/scorer.json",
        "artifacts/weak_labels.jsonl",
        "artifacts/classifier.json",
        "gen_rerank_multimodal/run.trec",
        "gen_rerank_multimodal/report.json",
        "gen_rerank_multimodal/metrics.tsv",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }

    let oq = tmp.path().join("original_query.json");
    let o = bin(&["run", "--config", oq.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("system\tMRR\t"));

    let baseline = out.join("original_query/report.json");
    let o = bin(&["compare", "--config", mm, "--baseline", baseline.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = String::from_utf8(o.stdout).unwrap();
    assert_eq!(table.lines().count(), 11);
    assert!(table.starts_with("metric\tt\tp\tp_bonferroni\tsignificant\n"));
    assert!(out
        .join("gen_rerank_multimodal/significance_vs_original_query.tsv")
        .exists());

    let o = bin(&["compare", "--config", mm]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error[E_ARGUMENT]"));
}
