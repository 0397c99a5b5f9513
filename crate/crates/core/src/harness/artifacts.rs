//! Building, persisting and loading the pipeline's intermediate artifacts.
//!
//! Every `ensure_*` function loads its artifact when the file exists. When
//! it does not, the artifact is built and saved if `build` is set, and a
//! missing-artifact error is returned otherwise.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::clarify::{
    aggregate_weak_labels, load_embeddings, load_weak_labels, train_classifier, weak_label, weak_labels_to_jsonl,
    ClassLabel, ClassifierSample, EmbeddingStore, ReferenceClassifier, WeakLabelRecord,
};
use crate::corpus::{split_facets, Split, SplitAssignment};
use crate::error::{Error, Result};
use crate::eval::{evaluate_ranking, Gain};
use crate::genret::{
    identifiers_to_jsonl, load_identifiers, make_identifiers, make_training_targets, train_reference_scorer,
    Identifier, ReferenceScorer, TrainingPair,
};
use crate::harness::config::ExperimentConfig;
use crate::harness::pipeline::{collect_samples, hashed_store, Engine, Inputs, Sample};
use crate::retrieval::InvertedIndex;

fn write(path: &Path, data: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, data).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_file(path: &Path, data: &str) -> Result<()> {
    write(path, data)
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

fn missing(cfg: &ExperimentConfig, what: &str, path: &Path, command: &str) -> Error {
    Error::MissingArtifact {
        mode: cfg.mode.name().to_string(),
        what: format!(
            "{what} at {} (build it with `{command}` or `run --prepare`)",
            path.display()
        ),
    }
}

pub fn make_split(cfg: &ExperimentConfig, inputs: &Inputs) -> Result<SplitAssignment> {
    split_facets(&inputs.dataset, &cfg.split_ratios, cfg.seed)
}

pub fn save_split(cfg: &ExperimentConfig, split: &SplitAssignment) -> Result<()> {
    let path = cfg.split_path();
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    split.save(path)
}

pub fn ensure_split(cfg: &ExperimentConfig, inputs: &Inputs, build: bool) -> Result<SplitAssignment> {
    let path = cfg.split_path();
    if path.exists() {
        return SplitAssignment::load(&path);
    }
    if !build {
        return Err(missing(cfg, "facet split", &path, "split"));
    }
    let split = make_split(cfg, inputs)?;
    save_split(cfg, &split)?;
    Ok(split)
}

pub fn build_index(inputs: &Inputs) -> Result<InvertedIndex> {
    InvertedIndex::build(inputs.corpus.iter())
}

pub fn save_index(cfg: &ExperimentConfig, index: &InvertedIndex) -> Result<()> {
    write(&cfg.index_path(), &index.to_persisted_string())
}

pub fn ensure_index(cfg: &ExperimentConfig, inputs: &Inputs, build: bool) -> Result<InvertedIndex> {
    let path = cfg.index_path();
    if path.exists() {
        return InvertedIndex::load(&path);
    }
    if !build {
        return Err(missing(cfg, "index", &path, "index"));
    }
    let index = build_index(inputs)?;
    save_index(cfg, &index)?;
    Ok(index)
}

pub fn build_identifiers(cfg: &ExperimentConfig, inputs: &Inputs, index: &InvertedIndex) -> Result<Vec<Identifier>> {
    make_identifiers(&inputs.corpus, cfg.genret.strategy, index)
}

pub fn save_identifiers(cfg: &ExperimentConfig, identifiers: &[Identifier]) -> Result<()> {
    write(
        &cfg.identifiers_path(),
        &identifiers_to_jsonl(identifiers, cfg.genret.strategy),
    )
}

pub fn ensure_identifiers(
    cfg: &ExperimentConfig,
    inputs: &Inputs,
    index: &InvertedIndex,
    build: bool,
) -> Result<Vec<Identifier>> {
    let path = cfg.identifiers_path();
    if path.exists() {
        return load_identifiers(&path, &inputs.corpus);
    }
    if !build {
        return Err(missing(cfg, "identifier table", &path, "identifiers"));
    }
    let ids = build_identifiers(cfg, inputs, index)?;
    save_identifiers(cfg, &ids)?;
    Ok(ids)
}

/// (text context, relevant-identifier target) for every judged train sample.
pub fn scorer_training_pairs(
    cfg: &ExperimentConfig,
    inputs: &Inputs,
    index: &InvertedIndex,
    identifiers: &[Identifier],
    split: &SplitAssignment,
) -> Result<Vec<TrainingPair>> {
    let by_doc: HashMap<String, Identifier> = identifiers.iter().map(|id| (id.doc_id.clone(), id.clone())).collect();
    let engine = Engine::new(cfg, inputs, index);
    let mut targets: BTreeMap<&str, Option<Vec<String>>> = BTreeMap::new();
    let samples = collect_samples(&inputs.dataset, Some((split, Split::Train)))?;
    let mut pairs = Vec::new();
    for s in &samples {
        let target = targets.entry(&s.facet_id).or_insert_with(|| {
            match make_training_targets(&s.facet_id, &inputs.qrels, &by_doc, cfg.genret.top_n) {
                Ok(t) => Some(t),
                Err(e) => {
                    log::warn!("no training target for facet '{}': {e}", s.facet_id);
                    None
                }
            }
        });
        if let Some(target) = target {
            pairs.push(TrainingPair {
                context: engine.text_context(s)?,
                target: target.clone(),
            });
        }
    }
    Ok(pairs)
}

pub fn train_scorer(
    cfg: &ExperimentConfig,
    inputs: &Inputs,
    index: &InvertedIndex,
    identifiers: &[Identifier],
    split: &SplitAssignment,
) -> Result<ReferenceScorer> {
    let pairs = scorer_training_pairs(cfg, inputs, index, identifiers, split)?;
    log::info!("training reference scorer on {} pairs", pairs.len());
    train_reference_scorer(&pairs, cfg.genret.lambdas)
}

pub fn save_scorer(cfg: &ExperimentConfig, scorer: &ReferenceScorer) -> Result<()> {
    write(&cfg.scorer_path(), &scorer.to_persisted_string())
}

pub fn ensure_scorer(
    cfg: &ExperimentConfig,
    inputs: &Inputs,
    index: &InvertedIndex,
    identifiers: &[Identifier],
    build: bool,
) -> Result<ReferenceScorer> {
    let path = cfg.scorer_path();
    if path.exists() {
        return ReferenceScorer::load(&path);
    }
    if !build {
        return Err(missing(cfg, "reference scorer", &path, "train-scorer"));
    }
    let split = ensure_split(cfg, inputs, true)?;
    let scorer = train_scorer(cfg, inputs, index, identifiers, &split)?;
    save_scorer(cfg, &scorer)?;
    Ok(scorer)
}

/// Embedding file when configured, hashed question/aspect text otherwise.
pub fn load_store(cfg: &ExperimentConfig, inputs: &Inputs) -> Result<EmbeddingStore> {
    match &cfg.paths.embeddings {
        Some(p) => load_embeddings(cfg.resolve(p)),
        None => hashed_store(&inputs.dataset, cfg.embedding_dim, cfg.seed),
    }
}

/// ΔnDCG between image-augmented and text-only generative rankings,
/// averaged per question over its judged samples.
pub fn weak_label_records(
    engine: &Engine<'_>,
    inputs: &Inputs,
    samples: &[Sample],
    images: usize,
) -> Result<Vec<WeakLabelRecord>> {
    let g_max = inputs.qrels.max_grade();
    let judged: Vec<&Sample> = samples.iter().filter(|s| inputs.qrels.is_judged(&s.facet_id)).collect();
    let deltas: Vec<(&str, f64)> = judged
        .par_iter()
        .map(|s| {
            let grades = inputs.qrels.grades(&s.facet_id).expect("judged facet has grades");
            let (tor, mur) = engine.tor_mur(s, images.max(1))?;
            let ndcg = |r: &crate::retrieval::RankedList| -> Result<[f64; 3]> {
                let ids: Vec<&str> = r.doc_ids().collect();
                let m = evaluate_ranking(&ids, grades, g_max, Gain::Exponential)?;
                Ok([m.values()[4], m.values()[5], m.values()[6]])
            };
            Ok((s.question_id.as_str(), weak_label(ndcg(&tor)?, ndcg(&mur)?).delta))
        })
        .collect::<Result<_>>()?;
    Ok(aggregate_weak_labels(deltas))
}

pub fn build_weak_labels(
    cfg: &ExperimentConfig,
    inputs: &Inputs,
    index: &InvertedIndex,
    identifiers: Vec<Identifier>,
    scorer: ReferenceScorer,
) -> Result<Vec<WeakLabelRecord>> {
    let samples = match cfg.weak_label_split {
        Some(which) => {
            let split = ensure_split(cfg, inputs, false)?;
            collect_samples(&inputs.dataset, Some((&split, which)))?
        }
        None => collect_samples(&inputs.dataset, None)?,
    };
    let engine = Engine::new(cfg, inputs, index)
        .with_generative(identifiers, scorer)
        .with_embeddings(load_store(cfg, inputs)?);
    weak_label_records(&engine, inputs, &samples, cfg.images_per_question)
}

pub fn save_weak_labels(cfg: &ExperimentConfig, records: &[WeakLabelRecord]) -> Result<()> {
    write(&cfg.weak_labels_path(), &weak_labels_to_jsonl(records))
}

pub fn ensure_weak_labels(
    cfg: &ExperimentConfig,
    inputs: &Inputs,
    index: &InvertedIndex,
    identifiers: &[Identifier],
    scorer: &ReferenceScorer,
    build: bool,
) -> Result<BTreeMap<String, ClassLabel>> {
    let path = cfg.weak_labels_path();
    if !path.exists() {
        if !build {
            return Err(missing(cfg, "weak labels", &path, "weak-label"));
        }
        let records = build_weak_labels(cfg, inputs, index, identifiers.to_vec(), scorer.clone())?;
        save_weak_labels(cfg, &records)?;
    }
    Ok(load_weak_labels(&path)?
        .into_iter()
        .map(|(q, (_, label))| (q, label))
        .collect())
}

/// One sample per labeled question asked on a train facet.
pub fn classifier_samples(
    inputs: &Inputs,
    labels: &BTreeMap<String, ClassLabel>,
    split: &SplitAssignment,
) -> Result<Vec<ClassifierSample>> {
    let questions: BTreeSet<String> = collect_samples(&inputs.dataset, Some((split, Split::Train)))?
        .into_iter()
        .map(|s| s.question_id)
        .collect();
    let mut out = Vec::new();
    for qid in questions {
        let Some(&label) = labels.get(&qid) else { continue };
        let q = inputs
            .dataset
            .question(&qid)
            .ok_or_else(|| Error::UnknownId(qid.clone()))?;
        let topic = inputs
            .dataset
            .topic(&q.topic_id)
            .ok_or_else(|| Error::UnknownId(q.topic_id.clone()))?;
        out.push(ClassifierSample {
            query: topic.query.clone(),
            question: q.text.clone(),
            label,
        });
    }
    Ok(out)
}

pub fn build_classifier(
    cfg: &ExperimentConfig,
    inputs: &Inputs,
    labels: &BTreeMap<String, ClassLabel>,
    split: &SplitAssignment,
) -> Result<ReferenceClassifier> {
    let samples = classifier_samples(inputs, labels, split)?;
    log::info!("training classifier on {} questions", samples.len());
    train_classifier(&samples, cfg.classifier_alpha)
}

pub fn ensure_classifier(
    cfg: &ExperimentConfig,
    inputs: &Inputs,
    labels: impl FnOnce() -> Result<BTreeMap<String, ClassLabel>>,
    build: bool,
) -> Result<ReferenceClassifier> {
    let path = cfg.classifier_path();
    if path.exists() {
        return ReferenceClassifier::load(&path);
    }
    if !build {
        return Err(missing(cfg, "classifier", &path, "train-classifier"));
    }
    let split = ensure_split(cfg, inputs, true)?;
    let clf = build_classifier(cfg, inputs, &labels()?, &split)?;
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    clf.save(&path)?;
    Ok(clf)
}
