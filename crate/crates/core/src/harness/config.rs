//! Experiment configuration, read from one JSON file per run.
//!
//! Relative paths resolve against the directory holding the config file.
//! Every field except `paths.dataset`, `paths.corpus`, `paths.qrels` and
//! `paths.output_dir` has a default; unknown fields are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{Split, SplitRatios};
use crate::error::{Error, Result};
use crate::eval::Gain;
use crate::genret::{IdentifierStrategy, Lambdas, DEFAULT_BEAM_SIZE};
use crate::retrieval::{Bm25Params, RankingModel, DEFAULT_FIRST_STAGE_K};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub dataset: PathBuf,
    pub corpus: PathBuf,
    pub qrels: PathBuf,
    /// Precomputed question/image vectors; hashed text embeddings otherwise.
    #[serde(default)]
    pub embeddings: Option<PathBuf>,
    /// Defaults to `<output_dir>/split.json`.
    #[serde(default)]
    pub split: Option<PathBuf>,
    /// Defaults to `<output_dir>/artifacts`.
    #[serde(default)]
    pub artifacts_dir: Option<PathBuf>,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// First-stage ranking of the topic query alone.
    OriginalQuery,
    /// Weighted query/question/answer lexical ranking.
    LexicalBaseline,
    GenRerankTextOnly,
    #[default]
    GenRerankMultimodal,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::OriginalQuery => "original_query",
            Mode::LexicalBaseline => "lexical_baseline",
            Mode::GenRerankTextOnly => "gen_rerank_text_only",
            Mode::GenRerankMultimodal => "gen_rerank_multimodal",
        }
    }

    pub fn is_generative(self) -> bool {
        matches!(self, Mode::GenRerankTextOnly | Mode::GenRerankMultimodal)
    }
}

/// Decides whether a question gets images in multimodal mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// Always attach.
    #[default]
    Off,
    /// Attach iff the question's weak label is VEQ.
    OracleWeakLabels,
    /// Attach iff the trained classifier predicts VEQ.
    ReferenceClassifier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrieScope {
    /// One trie over each sample's first-stage candidates.
    #[default]
    PerFacet,
    /// One trie over the whole corpus.
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstStageQuery {
    #[default]
    Topic,
    TopicQuestionAnswer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    Bm25,
    Ql,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldWeights {
    pub query: f64,
    pub question: f64,
    pub answer: f64,
}

impl Default for FieldWeights {
    fn default() -> Self {
        FieldWeights {
            query: 2.0,
            question: 1.0,
            answer: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QlConfig {
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default)]
    pub weights: FieldWeights,
}

fn default_mu() -> f64 {
    2000.0
}

impl Default for QlConfig {
    fn default() -> Self {
        QlConfig {
            mu: default_mu(),
            weights: FieldWeights::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirstStageConfig {
    #[serde(default)]
    pub model: ModelKind,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub query: FirstStageQuery,
}

fn default_k() -> usize {
    DEFAULT_FIRST_STAGE_K
}

impl Default for FirstStageConfig {
    fn default() -> Self {
        FirstStageConfig {
            model: ModelKind::Bm25,
            k: default_k(),
            query: FirstStageQuery::Topic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenretConfig {
    #[serde(default)]
    pub strategy: IdentifierStrategy,
    #[serde(default = "default_beam")]
    pub beam_size: usize,
    #[serde(default)]
    pub trie_scope: TrieScope,
    /// Relevant identifiers per training target.
    #[serde(default = "default_top_n")]
    pub top_n: usize,
    #[serde(default)]
    pub lambdas: Lambdas,
}

fn default_beam() -> usize {
    DEFAULT_BEAM_SIZE
}

fn default_top_n() -> usize {
    5
}

impl Default for GenretConfig {
    fn default() -> Self {
        GenretConfig {
            strategy: IdentifierStrategy::default(),
            beam_size: default_beam(),
            trie_scope: TrieScope::default(),
            top_n: default_top_n(),
            lambdas: Lambdas::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Row label in metric tables; defaults to the mode name.
    #[serde(default)]
    pub name: Option<String>,
    pub paths: Paths,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub split_ratios: SplitRatios,
    #[serde(default)]
    pub bm25: Bm25Params,
    #[serde(default)]
    pub ql: QlConfig,
    #[serde(default)]
    pub first_stage: FirstStageConfig,
    /// Ranker of the lexical baseline mode.
    #[serde(default = "default_lexical_model")]
    pub lexical_model: ModelKind,
    #[serde(default)]
    pub genret: GenretConfig,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub classification: Classification,
    #[serde(default = "default_alpha")]
    pub classifier_alpha: f64,
    #[serde(default = "default_images")]
    pub images_per_question: usize,
    /// Dimension of hashed embeddings when no embedding file is given.
    #[serde(default = "default_dim")]
    pub embedding_dim: usize,
    /// Facets evaluated; `null` evaluates every facet.
    #[serde(default = "default_eval_split")]
    pub eval_split: Option<Split>,
    /// Facets used for weak labels; `null` labels every facet.
    #[serde(default)]
    pub weak_label_split: Option<Split>,
    #[serde(default)]
    pub gain: Gain,
    /// Overrides the largest grade in the judgments.
    #[serde(default)]
    pub g_max: Option<u32>,
    #[serde(default)]
    pub baseline_report: Option<PathBuf>,
    #[serde(skip)]
    base_dir: PathBuf,
}

fn default_lexical_model() -> ModelKind {
    ModelKind::Ql
}

fn default_alpha() -> f64 {
    1.0
}

fn default_images() -> usize {
    1
}

fn default_dim() -> usize {
    64
}

fn default_eval_split() -> Option<Split> {
    Some(Split::Test)
}

impl ExperimentConfig {
    pub fn from_json_str(json: &str, origin: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: ExperimentConfig =
            serde_json::from_str(json).map_err(|e| Error::parse(format!("{origin}:{}:{}", e.line(), e.column()), e))?;
        cfg.base_dir = base_dir.into();
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json_str(&json, &path.display().to_string(), base)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization is infallible") + "\n"
    }

    pub fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.genret.beam_size == 0 {
            return bad("genret.beam_size must be >= 1".into());
        }
        if self.genret.top_n == 0 {
            return bad("genret.top_n must be >= 1".into());
        }
        if self.first_stage.k == 0 {
            return bad("first_stage.k must be >= 1".into());
        }
        if self.images_per_question > crate::corpus::MAX_IMAGES_PER_QUESTION {
            return bad(format!(
                "images_per_question must be in 0..=3, got {}",
                self.images_per_question
            ));
        }
        if self.embedding_dim < 8 {
            return bad(format!("embedding_dim must be >= 8, got {}", self.embedding_dim));
        }
        if !(self.ql.mu > 0.0 && self.ql.mu.is_finite()) {
            return bad(format!("ql.mu must be > 0, got {}", self.ql.mu));
        }
        let w = self.ql.weights;
        if [w.query, w.question, w.answer]
            .iter()
            .any(|x| !(x.is_finite() && *x >= 0.0))
            || w.query + w.question + w.answer <= 0.0
        {
            return bad("ql.weights must be non-negative with a positive sum".into());
        }
        if !(self.classifier_alpha > 0.0 && self.classifier_alpha.is_finite()) {
            return bad(format!("classifier_alpha must be > 0, got {}", self.classifier_alpha));
        }
        let l = self.genret.lambdas;
        Lambdas::new(l.bigram, l.unigram, l.overlap)?;
        Ok(())
    }

    /// Directory relative paths are resolved against.
    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    pub fn set_base_dir(&mut self, dir: impl Into<PathBuf>) {
        self.base_dir = dir.into();
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn system_name(&self) -> &str {
        self.name.as_deref().unwrap_or(self.mode.name())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.paths.output_dir)
    }

    pub fn artifacts_dir(&self) -> PathBuf {
        match &self.paths.artifacts_dir {
            Some(p) => self.resolve(p),
            None => self.output_dir().join("artifacts"),
        }
    }

    pub fn split_path(&self) -> PathBuf {
        match &self.paths.split {
            Some(p) => self.resolve(p),
            None => self.output_dir().join("split.json"),
        }
    }

    pub fn index_path(&self) -> PathBuf {
        self.artifacts_dir().join("index.idx")
    }

    pub fn identifiers_path(&self) -> PathBuf {
        let strategy = match self.genret.strategy {
            IdentifierStrategy::DocN => "doc_n",
            IdentifierStrategy::DocF5 => "doc_f5",
            IdentifierStrategy::DocK => "doc_k",
        };
        self.artifacts_dir().join(format!("identifiers.{strategy}.jsonl"))
    }

    pub fn scorer_path(&self) -> PathBuf {
        self.artifacts_dir().join("scorer.json")
    }

    pub fn weak_labels_path(&self) -> PathBuf {
        self.artifacts_dir().join("weak_labels.jsonl")
    }

    pub fn classifier_path(&self) -> PathBuf {
        self.artifacts_dir().join("classifier.json")
    }

    pub fn report_path(&self) -> PathBuf {
        self.output_dir().join("report.json")
    }

    pub fn run_path(&self) -> PathBuf {
        self.output_dir().join("run.trec")
    }

    pub fn metrics_tsv_path(&self) -> PathBuf {
        self.output_dir().join("metrics.tsv")
    }

    pub fn first_stage_model(&self) -> RankingModel {
        self.model(self.first_stage.model)
    }

    pub fn lexical_baseline_model(&self) -> RankingModel {
        self.model(self.lexical_model)
    }

    fn model(&self, kind: ModelKind) -> RankingModel {
        match kind {
            ModelKind::Bm25 => RankingModel::Bm25(self.bm25),
            ModelKind::Ql => RankingModel::Ql { mu: self.ql.mu },
        }
    }
}
