//! Inverted index over tokenized documents.
//!
//! # Persisted layout
//!
//! A UTF-8 file whose first line is exactly `CLARIFYIR-IDX v1`, followed by a
//! single JSON object:
//!
//! ```text
//! CLARIFYIR-IDX v1
//! {"docs":[{"id":"d1","ordinal":0,"len":2},...],
//!  "postings":{"cat":[[0,1]],"sat":[[0,1],[1,2]],...}}
//! ```
//!
//! `docs` is in ascending ordinal order; each posting is `[doc position, tf]`
//! with positions indexing `docs`. Only integers are stored, so derived
//! statistics (and therefore scores) are recomputed bit-identically on load.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::text::tokenize;

pub const INDEX_HEADER: &str = "CLARIFYIR-IDX v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexedDoc {
    pub id: String,
    pub ordinal: u64,
    pub len: u32,
}

#[derive(Serialize, Deserialize)]
struct IndexFile {
    docs: Vec<IndexedDoc>,
    postings: BTreeMap<String, Vec<(u32, u32)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvertedIndex {
    docs: Vec<IndexedDoc>,
    by_id: HashMap<String, usize>,
    /// token → (doc position, tf), ascending by position.
    postings: BTreeMap<String, Vec<(u32, u32)>>,
    collection_freq: HashMap<String, u64>,
    total_tokens: u64,
    avg_len: f64,
}

impl InvertedIndex {
    pub fn build<'a>(corpus: impl IntoIterator<Item = &'a Document>) -> Result<Self> {
        let mut docs: Vec<&Document> = corpus.into_iter().collect();
        docs.sort_by_key(|d| d.ordinal);
        let mut indexed = Vec::with_capacity(docs.len());
        let mut postings: BTreeMap<String, Vec<(u32, u32)>> = BTreeMap::new();
        for (pos, doc) in docs.iter().enumerate() {
            let tokens = tokenize(&doc.text);
            let mut tf: BTreeMap<String, u32> = BTreeMap::new();
            for tok in &tokens {
                *tf.entry(tok.clone()).or_insert(0) += 1;
            }
            for (tok, n) in tf {
                postings.entry(tok).or_default().push((pos as u32, n));
            }
            indexed.push(IndexedDoc {
                id: doc.id.clone(),
                ordinal: doc.ordinal,
                len: tokens.len() as u32,
            });
        }
        Self::from_parts(indexed, postings)
    }

    fn from_parts(docs: Vec<IndexedDoc>, postings: BTreeMap<String, Vec<(u32, u32)>>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(docs.len());
        for (pos, doc) in docs.iter().enumerate() {
            if by_id.insert(doc.id.clone(), pos).is_some() {
                return Err(Error::Duplicate {
                    kind: "document",
                    id: doc.id.clone(),
                });
            }
            if pos > 0 && docs[pos - 1].ordinal >= doc.ordinal {
                return Err(Error::Invariant(format!(
                    "index documents not in strictly ascending ordinal order at '{}'",
                    doc.id
                )));
            }
        }
        let mut collection_freq = HashMap::with_capacity(postings.len());
        for (tok, list) in &postings {
            if list.iter().any(|&(pos, tf)| pos as usize >= docs.len() || tf == 0) {
                return Err(Error::Invariant(format!("corrupt posting list for '{tok}'")));
            }
            if list.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(Error::Invariant(format!("unsorted posting list for '{tok}'")));
            }
            collection_freq.insert(tok.clone(), list.iter().map(|&(_, tf)| tf as u64).sum());
        }
        let total_tokens: u64 = docs.iter().map(|d| d.len as u64).sum();
        let avg_len = if docs.is_empty() {
            0.0
        } else {
            total_tokens as f64 / docs.len() as f64
        };
        Ok(InvertedIndex {
            docs,
            by_id,
            postings,
            collection_freq,
            total_tokens,
            avg_len,
        })
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn avg_len(&self) -> f64 {
        self.avg_len
    }

    /// Total number of tokens in the collection.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn docs(&self) -> &[IndexedDoc] {
        &self.docs
    }

    pub fn doc(&self, doc_id: &str) -> Option<&IndexedDoc> {
        self.position(doc_id).map(|p| &self.docs[p])
    }

    pub fn contains(&self, doc_id: &str) -> bool {
        self.by_id.contains_key(doc_id)
    }

    pub(crate) fn position(&self, doc_id: &str) -> Option<usize> {
        self.by_id.get(doc_id).copied()
    }

    pub(crate) fn doc_at(&self, pos: usize) -> &IndexedDoc {
        &self.docs[pos]
    }

    pub fn doc_len(&self, doc_id: &str) -> Option<u32> {
        self.doc(doc_id).map(|d| d.len)
    }

    pub fn df(&self, token: &str) -> usize {
        self.postings.get(token).map_or(0, Vec::len)
    }

    pub fn cf(&self, token: &str) -> u64 {
        self.collection_freq.get(token).copied().unwrap_or(0)
    }

    pub(crate) fn raw_postings(&self, token: &str) -> &[(u32, u32)] {
        self.postings.get(token).map_or(&[], Vec::as_slice)
    }

    /// (doc id, tf) pairs for `token`, in ordinal order.
    pub fn postings<'a>(&'a self, token: &str) -> impl Iterator<Item = (&'a str, u32)> + 'a {
        self.raw_postings(token)
            .iter()
            .map(move |&(pos, tf)| (self.docs[pos as usize].id.as_str(), tf))
    }

    pub(crate) fn tf_at(&self, token: &str, pos: usize) -> u32 {
        let list = self.raw_postings(token);
        match list.binary_search_by_key(&(pos as u32), |&(p, _)| p) {
            Ok(i) => list[i].1,
            Err(_) => 0,
        }
    }

    pub fn tf(&self, token: &str, doc_id: &str) -> u32 {
        self.position(doc_id).map_or(0, |pos| self.tf_at(token, pos))
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    pub fn to_persisted_string(&self) -> String {
        let file = IndexFile {
            docs: self.docs.clone(),
            postings: self.postings.clone(),
        };
        let body = serde_json::to_string(&file).expect("index serialization is infallible");
        format!("{INDEX_HEADER}\n{body}\n")
    }

    pub fn from_persisted_str(data: &str, origin: &str) -> Result<Self> {
        let (header, body) = data.split_once('\n').unwrap_or((data, ""));
        if header.trim_end() != INDEX_HEADER {
            return Err(Error::Header {
                expected: INDEX_HEADER.to_string(),
                found: header.chars().take(40).collect(),
            });
        }
        let file: IndexFile = serde_json::from_str(body)
            .map_err(|e| Error::parse(format!("{origin}:{}:{}", e.line() + 1, e.column()), e))?;
        Self::from_parts(file.docs, file.postings)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_persisted_string()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let data = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_persisted_str(&data, &path.display().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn cat_dog() -> Vec<Document> {
        vec![Document::new("d1", 1, "cat sat"), Document::new("d2", 2, "dog sat sat")]
    }

    #[test]
    fn direct_counts() {
        let idx = InvertedIndex::build(&cat_dog()).unwrap();
        assert_eq!(idx.df("sat"), 2);
        assert_eq!(idx.df("cat"), 1);
        assert_eq!(idx.doc_len("d2"), Some(3));
        assert_eq!(idx.avg_len(), 2.5);
        assert_eq!(idx.num_docs(), 2);
        assert_eq!(idx.cf("sat"), 3);
        assert_eq!(idx.total_tokens(), 5);
        assert_eq!(idx.tf("sat", "d2"), 2);
        assert_eq!(idx.postings("sat").collect::<Vec<_>>(), vec![("d1", 1), ("d2", 2)]);
    }

    #[test]
    fn empty_corpus_gives_empty_index() {
        let idx = InvertedIndex::build(&[]).unwrap();
        assert_eq!(idx.num_docs(), 0);
        assert_eq!(idx.avg_len(), 0.0);
    }

    #[test]
    fn duplicate_doc_id_is_error() {
        let docs = vec![Document::new("d1", 1, "a"), Document::new("d1", 2, "b")];
        assert!(matches!(InvertedIndex::build(&docs), Err(Error::Duplicate { .. })));
    }

    #[test]
    fn rebuild_is_identical() {
        let mut docs = cat_dog();
        let a = InvertedIndex::build(&docs).unwrap();
        docs.reverse();
        let b = InvertedIndex::build(&docs).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_persisted_string(), b.to_persisted_string());
    }

    #[test]
    fn persisted_round_trip() {
        let idx = InvertedIndex::build(&cat_dog()).unwrap();
        let text = idx.to_persisted_string();
        assert!(text.starts_with("CLARIFYIR-IDX v1\n"));
        let back = InvertedIndex::from_persisted_str(&text, "mem").unwrap();
        assert_eq!(idx, back);
    }

    #[test]
    fn wrong_header_is_rejected() {
        let err = InvertedIndex::from_persisted_str("CLARIFYIR-IDX v9\n{}", "mem").unwrap_err();
        assert!(matches!(err, Error::Header { .. }));
    }
}
