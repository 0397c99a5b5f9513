//! Generative re-ranking: document identifiers, identifier trie, sequence
//! scoring and trie-constrained beam search.

mod beam;
mod identifier;
mod scorer;
mod trie;

pub use beam::{constrained_beam_search, hypothesis_order, rank_candidates, GenRanking, Hypothesis, DEFAULT_BEAM_SIZE};
pub use identifier::{
    extract_keywords, identifiers_to_jsonl, load_identifiers, make_identifier, make_identifiers, make_training_targets,
    ordinal_token, parse_identifiers, Identifier, IdentifierStrategy, IDENTIFIER_LEN,
};
pub use scorer::{
    train_reference_scorer, Lambdas, ReferenceScorer, SequenceScorer, TrainingPair, UniformScorer, BOS_TOKEN,
    SCORER_HEADER,
};
pub use trie::{build_trie, IdentifierTrie, NextTokens, TrieEntry};
