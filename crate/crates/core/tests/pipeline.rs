mod common;

use std::collections::HashMap;

use clarifyir::corpus::Split;
use clarifyir::harness::fixture::{generate, CORPUS_FILE, DATASET_FILE, DEFAULT_FIXTURE_SEED, QRELS_FILE};
use clarifyir::harness::{
    collect_samples, compare_runs, evaluate_samples, run_experiment, ExperimentConfig, Inputs, Mode,
};
use clarifyir::retrieval::{search, InvertedIndex};
use clarifyir::text::tokenize;
use clarifyir::Error;

use common::{fixture_config, fixture_dir};

#[test]
fn generator_reproduces_shipped_fixture() {
    let fx = generate(DEFAULT_FIXTURE_SEED).unwrap();
    let read = |name: &str| std::fs::read_to_string(fixture_dir().join(name)).unwrap();
    assert_eq!(read(DATASET_FILE), fx.dataset.to_json_string());
    assert_eq!(read(CORPUS_FILE), fx.corpus_jsonl());
    assert_eq!(read(QRELS_FILE), fx.qrels.to_trec_string());
}

#[test]
fn original_query_equals_direct_first_stage_evaluation() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = fixture_config("original_query", tmp.path());
    let report = run_experiment(&cfg, true).unwrap();

    let inputs = Inputs::load(&cfg).unwrap();
    let index = InvertedIndex::build(inputs.corpus.iter()).unwrap();
    let samples = collect_samples(&inputs.dataset, None).unwrap();
    let mut rankings = HashMap::new();
    for s in &samples {
        let query = &inputs.dataset.topic(&s.topic_id).unwrap().query;
        let list = search(&index, &tokenize(query), cfg.first_stage.k, cfg.first_stage_model()).unwrap();
        rankings.insert(s.qid(), list.doc_ids().map(str::to_string).collect::<Vec<_>>());
    }
    let direct = evaluate_samples(&cfg, &inputs.qrels, &samples, &rankings).unwrap();
    assert_eq!(direct, report.body.evaluation);
}

#[test]
fn report_echoes_every_config_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = fixture_config("gen_rerank_text_only", tmp.path());
    let report = run_experiment(&cfg, true).unwrap();
    let echoed = serde_json::to_value(&report.body.config).unwrap();
    assert_eq!(echoed, serde_json::to_value(&cfg).unwrap());
    let keys: Vec<&str> = echoed.as_object().unwrap().keys().map(String::as_str).collect();
    for field in [
        "name",
        "paths",
        "seed",
        "split_ratios",
        "bm25",
        "ql",
        "first_stage",
        "lexical_model",
        "genret",
        "mode",
        "classification",
        "classifier_alpha",
        "images_per_question",
        "embedding_dim",
        "eval_split",
        "weak_label_split",
        "gain",
        "g_max",
        "baseline_report",
    ] {
        assert!(keys.contains(&field), "{field} not echoed");
    }
    let reparsed = ExperimentConfig::from_json_str(&cfg.to_json_string(), "echo", cfg.base_dir()).unwrap();
    assert_eq!(reparsed, cfg);
}

#[test]
fn zero_images_reduces_multimodal_to_text_only() {
    let tmp = tempfile::tempdir().unwrap();
    let text = run_experiment(&fixture_config("gen_rerank_text_only", tmp.path()), true).unwrap();
    let mut mm = fixture_config("gen_rerank_multimodal", tmp.path());
    mm.images_per_question = 0;
    let mm = run_experiment(&mm, true).unwrap();
    assert_eq!(mm.body.evaluation.facets, text.body.evaluation.facets);
}

#[test]
fn more_images_keep_the_ablation_ordering_on_test_facets() {
    let tmp = tempfile::tempdir().unwrap();
    let mrr = |mode: &str, images: usize| {
        let mut cfg = fixture_config(mode, tmp.path());
        cfg.eval_split = Some(Split::Test);
        cfg.images_per_question = images;
        cfg.paths.output_dir = tmp.path().join(format!("{mode}_{images}"));
        run_experiment(&cfg, true)
            .unwrap()
            .body
            .evaluation
            .macro_metrics
            .get("mrr")
            .unwrap()
    };
    let text = mrr("gen_rerank_text_only", 1);
    let oq = mrr("original_query", 1);
    assert!(text >= oq);
    for images in 1..=3 {
        assert!(mrr("gen_rerank_multimodal", images) >= text, "{images} images");
    }
}

#[test]
fn baseline_significance_and_comparison() {
    let tmp = tempfile::tempdir().unwrap();
    let oq_cfg = fixture_config("original_query", tmp.path());
    let oq = run_experiment(&oq_cfg, true).unwrap();

    let same = compare_runs(&oq.body, &oq.body).unwrap();
    assert_eq!(same.len(), 10);
    assert!(same
        .iter()
        .all(|r| r.result.p_raw == 1.0 && r.result.p_adjusted == 1.0 && !r.result.significant));

    let mut mm_cfg = fixture_config("gen_rerank_multimodal", tmp.path());
    mm_cfg.baseline_report = Some(oq_cfg.report_path());
    let mm = run_experiment(&mm_cfg, true).unwrap();
    let block = mm.body.significance.as_ref().unwrap();
    assert_eq!(block.baseline, "original_query");
    assert_eq!(block.comparisons, 10);
    let mrr = block.results.iter().find(|r| r.metric == "mrr").unwrap();
    assert!(mrr.result.t > 0.0 && mrr.result.significant);

    let mut test_only = fixture_config("original_query", tmp.path());
    test_only.eval_split = Some(Split::Test);
    test_only.paths.output_dir = tmp.path().join("oq_test");
    let narrow = run_experiment(&test_only, true).unwrap();
    assert!(matches!(
        compare_runs(&narrow.body, &oq.body),
        Err(Error::FacetMismatch(_))
    ));
}

#[test]
fn generative_mode_needs_artifacts_without_prepare() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = fixture_config("gen_rerank_text_only", tmp.path());
    assert_eq!(cfg.mode, Mode::GenRerankTextOnly);
    let err = run_experiment(&cfg, false).unwrap_err();
    assert_eq!(err.code(), "E_MISSING_ARTIFACT");
    assert!(err.to_string().contains("run --prepare"));
}
