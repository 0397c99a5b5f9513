//! Per-sample retrieval for every experiment mode, and facet-level scoring.
//!
//! A sample is one (facet, clarifying question, answer) record of the
//! dataset. Each sample is ranked independently; per-facet metrics are the
//! mean over the facet's samples and the macro row is the mean over facets.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clarify::{hash_embed, select_images, ClassLabel, EmbeddingStore, ReferenceClassifier};
use crate::corpus::{
    load_corpus, load_dataset, load_qrels, Corpus, Dataset, ImageRecord, Qrels, Split, SplitAssignment,
};
use crate::error::{Error, Result};
use crate::eval::{evaluate_ranking, macro_average, MetricsRecord};
use crate::genret::{constrained_beam_search, rank_candidates, Identifier, IdentifierTrie, ReferenceScorer};
use crate::harness::config::{ExperimentConfig, FirstStageQuery, Mode, TrieScope};
use crate::retrieval::{search, search_fields, InvertedIndex, RankedList, RankingModel, WeightedField};
use crate::text::tokenize;

/// Dataset, corpus and judgments of one experiment.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub dataset: Dataset,
    pub corpus: Corpus,
    pub qrels: Qrels,
}

impl Inputs {
    pub fn load(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(Inputs {
            dataset: load_dataset(cfg.resolve(&cfg.paths.dataset))?,
            corpus: load_corpus(cfg.resolve(&cfg.paths.corpus))?,
            qrels: load_qrels(cfg.resolve(&cfg.paths.qrels))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub facet_id: String,
    pub topic_id: String,
    pub question_id: String,
    pub answer: String,
}

impl Sample {
    /// Query id in run files: `<facet>#<question>`.
    pub fn qid(&self) -> String {
        format!("{}#{}", self.facet_id, self.question_id)
    }
}

/// Samples of the facets in `split` (all facets for `None`), ordered by
/// (facet, question).
pub fn collect_samples(ds: &Dataset, split: Option<(&SplitAssignment, Split)>) -> Result<Vec<Sample>> {
    let mut samples = Vec::new();
    for a in &ds.answers {
        if let Some((assignment, wanted)) = split {
            let got = assignment.get(&a.facet_id).ok_or_else(|| {
                Error::FacetMismatch(format!("facet '{}' is missing from the split assignment", a.facet_id))
            })?;
            if got != wanted {
                continue;
            }
        }
        samples.push(Sample {
            facet_id: a.facet_id.clone(),
            topic_id: a.topic_id.clone(),
            question_id: a.question_id.clone(),
            answer: a.text.clone(),
        });
    }
    samples.sort_by(|a, b| (&a.facet_id, &a.question_id).cmp(&(&b.facet_id, &b.question_id)));
    for w in samples.windows(2) {
        if w[0].facet_id == w[1].facet_id && w[0].question_id == w[1].question_id {
            return Err(Error::Duplicate {
                kind: "answer sample",
                id: w[1].qid(),
            });
        }
    }
    Ok(samples)
}

/// Whether a question gets images in multimodal mode.
#[derive(Debug, Clone, Default)]
pub enum AttachPolicy {
    #[default]
    Always,
    Labels(BTreeMap<String, ClassLabel>),
    Classifier(ReferenceClassifier),
}

struct Generative {
    identifiers: HashMap<String, Identifier>,
    scorer: ReferenceScorer,
    global_trie: Option<IdentifierTrie>,
}

/// One ranked sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRun {
    pub sample: Sample,
    pub ranking: RankedList,
    pub images: Vec<String>,
}

/// Everything needed to rank samples under one configuration.
pub struct Engine<'a> {
    cfg: &'a ExperimentConfig,
    inputs: &'a Inputs,
    index: &'a InvertedIndex,
    generative: Option<Generative>,
    store: Option<EmbeddingStore>,
    policy: AttachPolicy,
}

fn field(text: &str, weight: f64) -> WeightedField {
    WeightedField::new(tokenize(text), weight)
}

impl<'a> Engine<'a> {
    pub fn new(cfg: &'a ExperimentConfig, inputs: &'a Inputs, index: &'a InvertedIndex) -> Self {
        Engine {
            cfg,
            inputs,
            index,
            generative: None,
            store: None,
            policy: AttachPolicy::Always,
        }
    }

    pub fn with_generative(mut self, identifiers: Vec<Identifier>, scorer: ReferenceScorer) -> Self {
        let global_trie =
            (self.cfg.genret.trie_scope == TrieScope::Global).then(|| IdentifierTrie::build(&identifiers));
        let identifiers = identifiers.into_iter().map(|id| (id.doc_id.clone(), id)).collect();
        self.generative = Some(Generative {
            identifiers,
            scorer,
            global_trie,
        });
        self
    }

    pub fn with_embeddings(mut self, store: EmbeddingStore) -> Self {
        self.store = Some(store);
        self
    }

    pub fn with_policy(mut self, policy: AttachPolicy) -> Self {
        self.policy = policy;
        self
    }

    fn topic_query(&self, s: &Sample) -> Result<&str> {
        self.inputs
            .dataset
            .topic(&s.topic_id)
            .map(|t| t.query.as_str())
            .ok_or_else(|| Error::UnknownId(s.topic_id.clone()))
    }

    fn question_text(&self, s: &Sample) -> Result<&str> {
        self.inputs
            .dataset
            .question(&s.question_id)
            .map(|q| q.text.as_str())
            .ok_or_else(|| Error::UnknownId(s.question_id.clone()))
    }

    fn all_fields(&self, s: &Sample) -> Result<Vec<WeightedField>> {
        let w = self.cfg.ql.weights;
        Ok(vec![
            field(self.topic_query(s)?, w.query),
            field(self.question_text(s)?, w.question),
            field(&s.answer, w.answer),
        ])
    }

    fn topic_only(&self, s: &Sample, model: RankingModel) -> Result<RankedList> {
        search(
            self.index,
            &tokenize(self.topic_query(s)?),
            self.cfg.first_stage.k,
            model,
        )
    }

    /// Candidate set handed to the generative re-ranker.
    pub fn first_stage(&self, s: &Sample) -> Result<RankedList> {
        let model = self.cfg.first_stage_model();
        match self.cfg.first_stage.query {
            FirstStageQuery::Topic => self.topic_only(s, model),
            FirstStageQuery::TopicQuestionAnswer => {
                search_fields(self.index, &self.all_fields(s)?, self.cfg.first_stage.k, model)
            }
        }
    }

    /// Topic ⊕ question ⊕ answer tokens.
    pub fn text_context(&self, s: &Sample) -> Result<Vec<String>> {
        let mut ctx = tokenize(self.topic_query(s)?);
        ctx.extend(tokenize(self.question_text(s)?));
        ctx.extend(tokenize(&s.answer));
        Ok(ctx)
    }

    /// Up to `k` of the question's images, most similar first.
    pub fn select(&self, s: &Sample, k: usize) -> Result<Vec<&'a ImageRecord>> {
        let question = self
            .inputs
            .dataset
            .question(&s.question_id)
            .ok_or_else(|| Error::UnknownId(s.question_id.clone()))?;
        if k == 0 || question.images.is_empty() {
            return Ok(Vec::new());
        }
        let mut ids: Vec<String> = question.images.iter().map(|i| i.id.clone()).collect();
        ids.sort();
        let chosen = match &self.store {
            Some(store) if store.contains(&question.id) => {
                let known: Vec<String> = ids.iter().filter(|i| store.contains(i)).cloned().collect();
                if known.len() < ids.len() {
                    log::warn!(
                        "question '{}': {} image(s) without embeddings",
                        question.id,
                        ids.len() - known.len()
                    );
                }
                if known.is_empty() {
                    Vec::new()
                } else {
                    select_images(store, &question.id, &known, k)?
                }
            }
            _ => {
                log::warn!("question '{}' has no embedding; taking images in id order", question.id);
                ids.truncate(k);
                ids
            }
        };
        Ok(chosen
            .iter()
            .filter_map(|id| question.images.iter().find(|i| &i.id == id))
            .collect())
    }

    fn attach_images(&self, s: &Sample) -> Result<bool> {
        Ok(match &self.policy {
            AttachPolicy::Always => true,
            AttachPolicy::Labels(labels) => match labels.get(&s.question_id) {
                Some(label) => *label == ClassLabel::Veq,
                None => {
                    log::warn!("no weak label for question '{}'; treating it as TEQ", s.question_id);
                    false
                }
            },
            AttachPolicy::Classifier(clf) => {
                clf.classify(self.topic_query(s)?, self.question_text(s)?).0 == ClassLabel::Veq
            }
        })
    }

    /// Re-ranks `first` by constrained generation from `context`.
    pub fn gen_rank(&self, first: &RankedList, context: &[String]) -> Result<RankedList> {
        let generative = self.generative.as_ref().ok_or_else(|| Error::MissingArtifact {
            mode: self.cfg.mode.name().to_string(),
            what: "identifiers and scorer".into(),
        })?;
        let local;
        let trie = match &generative.global_trie {
            Some(t) => t,
            None => {
                local = IdentifierTrie::build(first.doc_ids().filter_map(|d| generative.identifiers.get(d)));
                &local
            }
        };
        if trie.is_empty() {
            return Ok(first.clone());
        }
        let beams = constrained_beam_search(
            &generative.scorer,
            context,
            trie,
            self.cfg.genret.beam_size,
            trie.max_depth(),
        )?;
        let mut ranked = rank_candidates(&beams, trie, first)?;
        ranked.truncate(self.cfg.first_stage.k);
        Ok(ranked)
    }

    /// Text-only and image-augmented generative rankings of one sample.
    pub fn tor_mur(&self, s: &Sample, images: usize) -> Result<(RankedList, RankedList)> {
        let first = self.first_stage(s)?;
        let ctx = self.text_context(s)?;
        let tor = self.gen_rank(&first, &ctx)?;
        let mut mm = ctx;
        for img in self.select(s, images)? {
            mm.extend(tokenize(&img.aspect));
        }
        let mur = self.gen_rank(&first, &mm)?;
        Ok((tor, mur))
    }

    pub fn rank_sample(&self, s: &Sample) -> Result<SampleRun> {
        let (ranking, images) = match self.cfg.mode {
            Mode::OriginalQuery => (self.topic_only(s, self.cfg.first_stage_model())?, Vec::new()),
            Mode::LexicalBaseline => (
                search_fields(
                    self.index,
                    &self.all_fields(s)?,
                    self.cfg.first_stage.k,
                    self.cfg.lexical_baseline_model(),
                )?,
                Vec::new(),
            ),
            Mode::GenRerankTextOnly => {
                let first = self.first_stage(s)?;
                (self.gen_rank(&first, &self.text_context(s)?)?, Vec::new())
            }
            Mode::GenRerankMultimodal => {
                let first = self.first_stage(s)?;
                let mut ctx = self.text_context(s)?;
                let chosen = if self.cfg.images_per_question > 0 && self.attach_images(s)? {
                    self.select(s, self.cfg.images_per_question)?
                } else {
                    Vec::new()
                };
                for img in &chosen {
                    ctx.extend(tokenize(&img.aspect));
                }
                (
                    self.gen_rank(&first, &ctx)?,
                    chosen.iter().map(|i| i.id.clone()).collect(),
                )
            }
        };
        Ok(SampleRun {
            sample: s.clone(),
            ranking,
            images,
        })
    }

    /// Ranks every sample in parallel; output order follows `samples`.
    pub fn rank_all(&self, samples: &[Sample]) -> Result<Vec<SampleRun>> {
        samples.par_iter().map(|s| self.rank_sample(s)).collect()
    }
}

/// Hashed embeddings of every question text and image aspect.
pub fn hashed_store(ds: &Dataset, dim: usize, seed: u64) -> Result<EmbeddingStore> {
    let mut store = EmbeddingStore::new(dim)?;
    let mut add = |id: &str, text: &str| -> Result<()> {
        match hash_embed(text, dim, seed) {
            Ok(v) if !store.contains(id) => store.insert(id, v),
            Ok(_) => Ok(()),
            Err(e) => {
                log::warn!("no embedding for '{id}': {e}");
                Ok(())
            }
        }
    };
    for q in &ds.questions {
        add(&q.id, &q.text)?;
        for img in &q.images {
            add(&img.id, &img.aspect)?;
        }
    }
    Ok(store)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetResult {
    pub samples: usize,
    pub metrics: MetricsRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub g_max: u32,
    pub facets: BTreeMap<String, FacetResult>,
    /// Facets without any positive judgment.
    pub skipped_facets: Vec<String>,
    #[serde(rename = "macro")]
    pub macro_metrics: MetricsRecord,
    /// Ranked documents without a judgment, counted as grade 0.
    pub unjudged_ranked_docs: usize,
    /// Samples without a ranking in the run.
    pub missing_samples: usize,
}

/// Scores each sample's ranking (keyed by [`Sample::qid`]) and aggregates
/// per facet, then across facets.
pub fn evaluate_samples(
    cfg: &ExperimentConfig,
    qrels: &Qrels,
    samples: &[Sample],
    rankings: &HashMap<String, Vec<String>>,
) -> Result<Evaluation> {
    let g_max = cfg.g_max.unwrap_or_else(|| qrels.max_grade());
    let mut per_facet: BTreeMap<&str, Vec<MetricsRecord>> = BTreeMap::new();
    let mut skipped = BTreeSet::new();
    let mut unjudged = 0;
    let mut missing = 0;
    let empty = Vec::new();
    for s in samples {
        let Some(grades) = qrels.grades(&s.facet_id).filter(|_| qrels.is_judged(&s.facet_id)) else {
            skipped.insert(s.facet_id.clone());
            continue;
        };
        let qid = s.qid();
        let ranking = rankings.get(&qid).unwrap_or_else(|| {
            missing += 1;
            &empty
        });
        unjudged += ranking.iter().filter(|d| !grades.contains_key(*d)).count();
        let m = evaluate_ranking(ranking, grades, g_max, cfg.gain)?;
        per_facet.entry(&s.facet_id).or_default().push(m);
    }
    for f in &skipped {
        log::warn!("facet '{f}' has no relevant judgments; skipped");
    }
    if missing > 0 {
        log::warn!("{missing} sample(s) have no ranking; scored as empty");
    }
    let facets: BTreeMap<String, FacetResult> = per_facet
        .into_iter()
        .map(|(f, records)| {
            let metrics = macro_average(&records)?;
            Ok((
                f.to_string(),
                FacetResult {
                    samples: records.len(),
                    metrics,
                },
            ))
        })
        .collect::<Result<_>>()?;
    if facets.is_empty() {
        return Err(Error::NoRelevantDocuments(
            "no judged facet among the evaluated samples".into(),
        ));
    }
    let all: Vec<MetricsRecord> = facets.values().map(|r| r.metrics).collect();
    Ok(Evaluation {
        g_max,
        macro_metrics: macro_average(&all)?,
        facets,
        skipped_facets: skipped.into_iter().collect(),
        unjudged_ranked_docs: unjudged,
        missing_samples: missing,
    })
}

/// TREC run lines: `qid Q0 doc rank score tag`, rank from 1.
pub fn trec_run_string(runs: &[SampleRun], tag: &str) -> String {
    let mut out = String::new();
    for run in runs {
        let qid = run.sample.qid();
        for (r, d) in run.ranking.entries().iter().enumerate() {
            out.push_str(&format!("{qid} Q0 {} {} {} {tag}\n", d.doc_id, r + 1, d.score));
        }
    }
    out
}

/// Reads a TREC run into qid → documents in rank order.
pub fn parse_trec_run(data: &str, origin: &str) -> Result<HashMap<String, Vec<String>>> {
    let mut rows: HashMap<String, Vec<(u64, String)>> = HashMap::new();
    for (n, line) in data.lines().enumerate() {
        let location = format!("{origin}:{}", n + 1);
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.is_empty() {
            continue;
        }
        if cols.len() != 6 {
            return Err(Error::parse(
                location,
                format!("expected 6 columns, found {}", cols.len()),
            ));
        }
        let rank: u64 = cols[3]
            .parse()
            .map_err(|_| Error::parse(&location, format!("rank '{}' is not an integer", cols[3])))?;
        cols[4]
            .parse::<f64>()
            .map_err(|_| Error::parse(&location, format!("score '{}' is not a number", cols[4])))?;
        rows.entry(cols[0].to_string())
            .or_default()
            .push((rank, cols[2].to_string()));
    }
    Ok(rows
        .into_iter()
        .map(|(qid, mut docs)| {
            docs.sort();
            (qid, docs.into_iter().map(|(_, d)| d).collect())
        })
        .collect())
}

pub fn rankings_of(runs: &[SampleRun]) -> HashMap<String, Vec<String>> {
    runs.iter()
        .map(|r| (r.sample.qid(), r.ranking.doc_ids().map(str::to_string).collect()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::ScoredDoc;

    fn run(facet: &str, q: &str, docs: &[(&str, f64)]) -> SampleRun {
        SampleRun {
            sample: Sample {
                facet_id: facet.into(),
                topic_id: "t".into(),
                question_id: q.into(),
                answer: String::new(),
            },
            ranking: RankedList::from_unsorted(
                docs.iter()
                    .enumerate()
                    .map(|(i, (d, s))| ScoredDoc {
                        doc_id: d.to_string(),
                        ordinal: i as u64,
                        score: *s,
                    })
                    .collect(),
            )
            .unwrap(),
            images: vec![],
        }
    }

    #[test]
    fn trec_round_trip() {
        let runs = [
            run("f1", "q1", &[("a", 2.0), ("b", f64::NEG_INFINITY)]),
            run("f2", "q1", &[("c", 0.5)]),
        ];
        let text = trec_run_string(&runs, "sys");
        assert!(
            text.starts_with("f1#q1 Q0 a 1 2 sys\nf1#q1 Q0 b 2 -inf sys\n"),
            "{text}"
        );
        let back = parse_trec_run(&text, "r").unwrap();
        assert_eq!(back, rankings_of(&runs));
        assert!(parse_trec_run("x Q0 d 1\n", "r").is_err());
    }

    #[test]
    fn facet_metrics_average_samples() {
        let cfg = ExperimentConfig::from_json_str(
            r#"{"paths":{"dataset":"d","corpus":"c","qrels":"q","output_dir":"o"}}"#,
            "c",
            "/",
        )
        .unwrap();
        let mut qrels = Qrels::new();
        qrels.insert("f1", "a", 1).unwrap();
        qrels.insert("f2", "a", 0).unwrap();
        let runs = [
            run("f1", "q1", &[("a", 1.0)]),
            run("f1", "q2", &[("b", 1.0), ("a", 0.5)]),
            run("f2", "q1", &[("a", 1.0)]),
        ];
        let samples: Vec<Sample> = runs.iter().map(|r| r.sample.clone()).collect();
        let ev = evaluate_samples(&cfg, &qrels, &samples, &rankings_of(&runs)).unwrap();
        assert_eq!(ev.skipped_facets, vec!["f2".to_string()]);
        assert_eq!(ev.facets["f1"].samples, 2);
        assert_eq!(ev.macro_metrics.get("mrr"), Some(0.75));
        assert_eq!(ev.macro_metrics.get("p@1"), Some(0.5));
        assert_eq!(ev.unjudged_ranked_docs, 1);
    }
}
