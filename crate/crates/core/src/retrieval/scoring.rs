use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::retrieval::InvertedIndex;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

/// Robertson idf with the +1 inside the log, never negative.
pub fn bm25_idf(num_docs: usize, df: usize) -> f64 {
    let n = num_docs as f64;
    let df = df as f64;
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

pub(crate) fn bm25_term(idf: f64, tf: u32, doc_len: u32, avg_len: f64, params: Bm25Params) -> f64 {
    if tf == 0 {
        return 0.0;
    }
    let tf = tf as f64;
    let norm = 1.0 - params.b + params.b * doc_len as f64 / avg_len;
    idf * tf * (params.k1 + 1.0) / (tf + params.k1 * norm)
}

pub fn bm25_score(index: &InvertedIndex, query: &[String], doc_id: &str, params: Bm25Params) -> Result<f64> {
    let pos = index
        .position(doc_id)
        .ok_or_else(|| Error::UnknownDocument(doc_id.to_string()))?;
    let len = index.doc_at(pos).len;
    Ok(query
        .iter()
        .map(|tok| {
            let idf = bm25_idf(index.num_docs(), index.df(tok));
            bm25_term(idf, index.tf_at(tok, pos), len, index.avg_len(), params)
        })
        .sum())
}

/// Weighted query field for query-likelihood scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedField {
    pub tokens: Vec<String>,
    pub weight: f64,
}

impl WeightedField {
    pub fn new(tokens: Vec<String>, weight: f64) -> Self {
        WeightedField { tokens, weight }
    }
}

/// Validates field weights and returns them normalized to sum 1.
pub(crate) fn normalized_weights(fields: &[WeightedField]) -> Result<Vec<f64>> {
    if fields.iter().any(|f| !f.weight.is_finite() || f.weight < 0.0) {
        return Err(Error::InvalidArgument("field weights must be finite and >= 0".into()));
    }
    let total: f64 = fields.iter().map(|f| f.weight).sum();
    if total <= 0.0 {
        return Err(Error::InvalidArgument("field weights must sum to > 0".into()));
    }
    Ok(fields.iter().map(|f| f.weight / total).collect())
}

pub(crate) fn ql_score_at(
    index: &InvertedIndex,
    fields: &[WeightedField],
    weights: &[f64],
    pos: usize,
    mu: f64,
) -> f64 {
    let len = index.doc_at(pos).len as f64;
    let total = index.total_tokens() as f64;
    fields
        .iter()
        .zip(weights)
        .map(|(field, w)| {
            let field_sum: f64 = field
                .tokens
                .iter()
                .filter_map(|tok| {
                    // Tokens unseen in the collection have zero smoothed mass.
                    let cf = index.cf(tok);
                    (cf > 0).then(|| {
                        let tf = index.tf_at(tok, pos) as f64;
                        ((tf + mu * cf as f64 / total) / (len + mu)).ln()
                    })
                })
                .sum();
            w * field_sum
        })
        .sum()
}

/// Dirichlet-smoothed query likelihood over weighted query fields.
pub fn ql_score(index: &InvertedIndex, fields: &[WeightedField], doc_id: &str, mu: f64) -> Result<f64> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!("mu must be > 0, got {mu}")));
    }
    let weights = normalized_weights(fields)?;
    let pos = index
        .position(doc_id)
        .ok_or_else(|| Error::UnknownDocument(doc_id.to_string()))?;
    Ok(ql_score_at(index, fields, &weights, pos, mu))
}
