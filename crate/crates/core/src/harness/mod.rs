//! Batch experiment harness: configuration, artifact stages, per-sample
//! retrieval, evaluation reports and the synthetic benchmark.

pub mod artifacts;
mod config;
pub mod fixture;
mod pipeline;
mod report;

pub use config::{
    Classification, ExperimentConfig, FieldWeights, FirstStageConfig, FirstStageQuery, GenretConfig, Mode, ModelKind,
    Paths, QlConfig, TrieScope,
};
pub use pipeline::{
    collect_samples, evaluate_samples, hashed_store, parse_trec_run, rankings_of, trec_run_string, AttachPolicy,
    Engine, Evaluation, FacetResult, Inputs, Sample, SampleRun,
};
pub use report::{
    body_json, compare_runs, evaluate_run, retrieve, run_experiment, significance_tsv, MetricSignificance, Provenance,
    ReportBody, RunReport, SignificanceBlock,
};
