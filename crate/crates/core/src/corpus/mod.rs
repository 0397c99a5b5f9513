//! Data model and ingestion: dataset, document corpus, judgments, splits.

mod dataset;
mod documents;
mod qrels;
mod split;
mod validate;

pub use dataset::{
    load_dataset, AnswerRecord, ClarifyingQuestion, Dataset, Facet, ImageRecord, QuestionSource, Topic,
    MAX_IMAGES_PER_QUESTION,
};
pub use documents::{load_corpus, parse_corpus, write_corpus, Corpus, Document};
pub use qrels::{load_qrels, parse_qrels, Qrels};
pub use split::{split_facet_ids, split_facets, split_sizes, Split, SplitAssignment, SplitRatios};
pub use validate::{validate_dataset, Finding, ValidationReport};
