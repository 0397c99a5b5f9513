use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::retrieval::scoring::{bm25_idf, bm25_term, normalized_weights, ql_score_at};
use crate::retrieval::{Bm25Params, InvertedIndex, WeightedField};

pub const DEFAULT_FIRST_STAGE_K: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum RankingModel {
    Bm25(Bm25Params),
    /// Dirichlet-smoothed query likelihood with prior `mu`.
    Ql {
        mu: f64,
    },
}

impl RankingModel {
    pub fn name(&self) -> &'static str {
        match self {
            RankingModel::Bm25(_) => "bm25",
            RankingModel::Ql { .. } => "ql",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredDoc {
    pub doc_id: String,
    pub ordinal: u64,
    pub score: f64,
}

/// Score-descending, then ordinal-ascending.
pub fn ranking_order(a: &ScoredDoc, b: &ScoredDoc) -> Ordering {
    b.score.total_cmp(&a.score).then(a.ordinal.cmp(&b.ordinal))
}

/// Duplicate-free list ordered by [`ranking_order`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RankedList(Vec<ScoredDoc>);

impl RankedList {
    /// Sorts `docs` into ranking order; duplicate doc ids are an error.
    pub fn from_unsorted(mut docs: Vec<ScoredDoc>) -> Result<Self> {
        let mut seen = HashMap::with_capacity(docs.len());
        for d in &docs {
            if seen.insert(d.doc_id.as_str(), ()).is_some() {
                return Err(Error::Duplicate {
                    kind: "ranked document",
                    id: d.doc_id.clone(),
                });
            }
        }
        docs.sort_by(ranking_order);
        Ok(RankedList(docs))
    }

    /// Keeps the given order; callers guarantee uniqueness.
    pub(crate) fn from_ordered(docs: Vec<ScoredDoc>) -> Self {
        debug_assert!({
            let mut ids: Vec<&str> = docs.iter().map(|d| d.doc_id.as_str()).collect();
            ids.sort_unstable();
            ids.windows(2).all(|w| w[0] != w[1])
        });
        RankedList(docs)
    }

    pub fn entries(&self) -> &[ScoredDoc] {
        &self.0
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|d| d.doc_id.as_str())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn truncate(&mut self, k: usize) {
        self.0.truncate(k);
    }

    /// 0-based rank of `doc_id`.
    pub fn rank_of(&self, doc_id: &str) -> Option<usize> {
        self.0.iter().position(|d| d.doc_id == doc_id)
    }
}

fn top_k(index: &InvertedIndex, scores: Vec<(usize, f64)>, k: usize) -> RankedList {
    let mut docs: Vec<ScoredDoc> = scores
        .into_iter()
        .map(|(pos, score)| {
            let d = index.doc_at(pos);
            ScoredDoc {
                doc_id: d.id.clone(),
                ordinal: d.ordinal,
                score,
            }
        })
        .collect();
    docs.sort_by(ranking_order);
    docs.truncate(k);
    RankedList(docs)
}

fn bm25_scores(index: &InvertedIndex, query: &[String], params: Bm25Params) -> Vec<(usize, f64)> {
    let mut acc: HashMap<usize, f64> = HashMap::new();
    for tok in query {
        let list = index.raw_postings(tok);
        if list.is_empty() {
            continue;
        }
        let idf = bm25_idf(index.num_docs(), list.len());
        for &(pos, tf) in list {
            let len = index.doc_at(pos as usize).len;
            *acc.entry(pos as usize).or_insert(0.0) += bm25_term(idf, tf, len, index.avg_len(), params);
        }
    }
    acc.into_iter().collect()
}

/// Top-`k` documents for a single-field query.
///
/// BM25 ranks only documents containing at least one query token; QL ranks
/// every document.
pub fn search(index: &InvertedIndex, query: &[String], k: usize, model: RankingModel) -> Result<RankedList> {
    search_fields(index, &[WeightedField::new(query.to_vec(), 1.0)], k, model)
}

/// Multi-field variant. QL weighs each field; BM25 scores the concatenation
/// of all fields with non-zero weight.
pub fn search_fields(
    index: &InvertedIndex,
    fields: &[WeightedField],
    k: usize,
    model: RankingModel,
) -> Result<RankedList> {
    let weights = normalized_weights(fields)?;
    let scores = match model {
        RankingModel::Bm25(params) => {
            let query: Vec<String> = fields
                .iter()
                .zip(&weights)
                .filter(|(_, &w)| w > 0.0)
                .flat_map(|(f, _)| f.tokens.iter().cloned())
                .collect();
            bm25_scores(index, &query, params)
        }
        RankingModel::Ql { mu } => {
            if !(mu > 0.0 && mu.is_finite()) {
                return Err(Error::InvalidArgument(format!("mu must be > 0, got {mu}")));
            }
            (0..index.num_docs())
                .map(|pos| (pos, ql_score_at(index, fields, &weights, pos, mu)))
                .collect()
        }
    };
    Ok(top_k(index, scores, k))
}
