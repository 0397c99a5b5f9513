//! Run reports, the end-to-end experiment driver and run comparison.
//!
//! A report is `{"body": ..., "body_sha256": ..., "generated_at_unix": ...}`.
//! The body is a pure function of the configuration and its inputs; the
//! timestamp lives outside it.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::Split;
use crate::error::{Error, Result};
use crate::eval::{metrics_tsv, paired_t_test, SignificanceResult, SystemMetrics, METRIC_NAMES};
use crate::harness::artifacts::{
    ensure_classifier, ensure_identifiers, ensure_index, ensure_scorer, ensure_split, ensure_weak_labels, file_sha256,
    load_store, write_file,
};
use crate::harness::config::{Classification, ExperimentConfig, Mode};
use crate::harness::pipeline::{
    collect_samples, evaluate_samples, parse_trec_run, trec_run_string, AttachPolicy, Engine, Evaluation, Inputs,
    Sample, SampleRun,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSignificance {
    pub metric: String,
    #[serde(flatten)]
    pub result: SignificanceResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceBlock {
    pub baseline: String,
    pub comparisons: usize,
    pub results: Vec<MetricSignificance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub version: String,
    /// SHA-256 of every input file and of the run file.
    pub files: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBody {
    pub system: String,
    pub mode: Mode,
    pub first_stage_model: String,
    pub config: ExperimentConfig,
    pub evaluated_split: Option<Split>,
    pub samples: usize,
    #[serde(flatten)]
    pub evaluation: Evaluation,
    pub significance: Option<SignificanceBlock>,
    pub provenance: Provenance,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub body: ReportBody,
    pub body_sha256: String,
    pub generated_at_unix: u64,
}

pub fn body_json(body: &ReportBody) -> String {
    serde_json::to_string_pretty(body).expect("report serialization is infallible")
}

impl RunReport {
    pub fn new(body: ReportBody) -> Self {
        let body_sha256 = format!("{:x}", Sha256::digest(body_json(&body).as_bytes()));
        let generated_at_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        RunReport {
            body,
            body_sha256,
            generated_at_unix,
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible") + "\n"
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), &self.to_json_string())
    }

    /// Loads a report and checks its body hash.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let report: RunReport = serde_json::from_str(&json)
            .map_err(|e| Error::parse(format!("{}:{}:{}", path.display(), e.line(), e.column()), e))?;
        let hash = format!("{:x}", Sha256::digest(body_json(&report.body).as_bytes()));
        if hash != report.body_sha256 {
            return Err(Error::Invariant(format!(
                "{}: body hash does not match its content",
                path.display()
            )));
        }
        Ok(report)
    }
}

/// Paired t-tests of every metric over the shared facets, Bonferroni-corrected
/// over the number of metrics.
pub fn compare_runs(a: &ReportBody, b: &ReportBody) -> Result<Vec<MetricSignificance>> {
    let fa: Vec<&String> = a.evaluation.facets.keys().collect();
    let fb: Vec<&String> = b.evaluation.facets.keys().collect();
    if fa != fb {
        let only_a = fa.iter().filter(|f| !b.evaluation.facets.contains_key(**f)).count();
        let only_b = fb.iter().filter(|f| !a.evaluation.facets.contains_key(**f)).count();
        return Err(Error::FacetMismatch(format!(
            "'{}' and '{}' evaluate different facets ({only_a} only in the first, {only_b} only in the second)",
            a.system, b.system
        )));
    }
    METRIC_NAMES
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let xs: Vec<f64> = a.evaluation.facets.values().map(|r| r.metrics.values()[i]).collect();
            let ys: Vec<f64> = b.evaluation.facets.values().map(|r| r.metrics.values()[i]).collect();
            Ok(MetricSignificance {
                metric: name.to_string(),
                result: paired_t_test(&xs, &ys, METRIC_NAMES.len())?,
            })
        })
        .collect()
}

pub fn significance_tsv(results: &[MetricSignificance]) -> String {
    let mut out = String::from("metric\tt\tp\tp_bonferroni\tsignificant\n");
    for r in results {
        out.push_str(&format!(
            "{}\t{:.4}\t{:.6}\t{:.6}\t{}\n",
            r.metric, r.result.t, r.result.p_raw, r.result.p_adjusted, r.result.significant
        ));
    }
    out
}

fn eval_samples(cfg: &ExperimentConfig, inputs: &Inputs, build: bool) -> Result<Vec<Sample>> {
    match cfg.eval_split {
        Some(which) => {
            let split = ensure_split(cfg, inputs, build)?;
            collect_samples(&inputs.dataset, Some((&split, which)))
        }
        None => collect_samples(&inputs.dataset, None),
    }
}

/// Ranks every evaluated sample under `cfg.mode` and writes the run file.
pub fn retrieve(cfg: &ExperimentConfig, inputs: &Inputs, prepare: bool) -> Result<Vec<SampleRun>> {
    let index = ensure_index(cfg, inputs, prepare)?;
    let samples = eval_samples(cfg, inputs, prepare)?;
    let mut engine = Engine::new(cfg, inputs, &index);
    if cfg.mode.is_generative() {
        let ids = ensure_identifiers(cfg, inputs, &index, prepare)?;
        let scorer = ensure_scorer(cfg, inputs, &index, &ids, prepare)?;
        if cfg.mode == Mode::GenRerankMultimodal {
            let labels = || ensure_weak_labels(cfg, inputs, &index, &ids, &scorer, prepare);
            let policy = match cfg.classification {
                Classification::Off => AttachPolicy::Always,
                Classification::OracleWeakLabels => AttachPolicy::Labels(labels()?),
                Classification::ReferenceClassifier => {
                    AttachPolicy::Classifier(ensure_classifier(cfg, inputs, labels, prepare)?)
                }
            };
            engine = engine.with_embeddings(load_store(cfg, inputs)?).with_policy(policy);
        }
        engine = engine.with_generative(ids, scorer);
    }
    log::info!("ranking {} samples with {}", samples.len(), cfg.mode.name());
    let runs = engine.rank_all(&samples)?;
    write_file(&cfg.run_path(), &trec_run_string(&runs, cfg.system_name()))?;
    Ok(runs)
}

/// Scores the run file of `cfg` and writes the report and metrics table.
pub fn evaluate_run(cfg: &ExperimentConfig, inputs: &Inputs) -> Result<RunReport> {
    let run_path = cfg.run_path();
    let data = std::fs::read_to_string(&run_path).map_err(|e| Error::io(&run_path, e))?;
    let rankings = parse_trec_run(&data, &run_path.display().to_string())?;
    let samples = eval_samples(cfg, inputs, false)?;
    let evaluation = evaluate_samples(cfg, &inputs.qrels, &samples, &rankings)?;

    let mut files = BTreeMap::new();
    for (name, path) in [
        ("dataset", cfg.resolve(&cfg.paths.dataset)),
        ("corpus", cfg.resolve(&cfg.paths.corpus)),
        ("qrels", cfg.resolve(&cfg.paths.qrels)),
        ("run", run_path),
    ] {
        files.insert(name.to_string(), file_sha256(&path)?);
    }
    if cfg.eval_split.is_some() {
        files.insert("split".to_string(), file_sha256(&cfg.split_path())?);
    }

    let mut body = ReportBody {
        system: cfg.system_name().to_string(),
        mode: cfg.mode,
        first_stage_model: cfg.first_stage_model().name().to_string(),
        config: cfg.clone(),
        evaluated_split: cfg.eval_split,
        samples: samples.len(),
        evaluation,
        significance: None,
        provenance: Provenance {
            seed: cfg.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            files,
        },
        notes: vec![
            "unjudged ranked documents count as grade 0".to_string(),
            "per-facet metrics average the facet's (question, answer) samples; macro averages facets".to_string(),
        ],
    };
    if let Some(baseline) = &cfg.baseline_report {
        let other = RunReport::load(cfg.resolve(baseline))?;
        body.significance = Some(SignificanceBlock {
            baseline: other.body.system.clone(),
            comparisons: METRIC_NAMES.len(),
            results: compare_runs(&body, &other.body)?,
        });
    }
    let report = RunReport::new(body);
    report.save(cfg.report_path())?;
    let row = SystemMetrics {
        system: report.body.system.clone(),
        metrics: report.body.evaluation.macro_metrics,
    };
    write_file(&cfg.metrics_tsv_path(), &metrics_tsv(&[row]))?;
    Ok(report)
}

/// Retrieval, evaluation and reporting in one pass. With `prepare`, missing
/// artifacts are built first.
pub fn run_experiment(cfg: &ExperimentConfig, prepare: bool) -> Result<RunReport> {
    let inputs = Inputs::load(cfg)?;
    let runs = retrieve(cfg, &inputs, prepare)?;
    log::info!(
        "{} of {} samples ranked with images",
        runs.iter().filter(|r| !r.images.is_empty()).count(),
        runs.len()
    );
    evaluate_run(cfg, &inputs)
}
