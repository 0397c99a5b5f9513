//! First-stage lexical retrieval: inverted index, BM25 and query likelihood.

mod index;
mod scoring;
mod search;

pub use index::{IndexedDoc, InvertedIndex, INDEX_HEADER};
pub use scoring::{bm25_idf, bm25_score, ql_score, Bm25Params, WeightedField};
pub use search::{ranking_order, search, search_fields, RankedList, RankingModel, ScoredDoc, DEFAULT_FIRST_STAGE_K};
