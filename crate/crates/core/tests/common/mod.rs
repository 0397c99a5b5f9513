#![allow(dead_code)]

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};

use clarifyir::genret::{hypothesis_order, Hypothesis, Identifier, IdentifierTrie, SequenceScorer};
use clarifyir::harness::ExperimentConfig;
use rand::Rng;

/// Deterministic pseudo-random scorer with coarse values, so ties are common.
pub struct TieHeavyScorer {
    pub seed: u64,
    pub levels: u64,
}

impl TieHeavyScorer {
    pub fn logprob(&self, prefix: &[String], tok: &str) -> f64 {
        let mut h = DefaultHasher::new();
        (self.seed, prefix, tok).hash(&mut h);
        -0.5 * (1 + h.finish() % self.levels) as f64
    }
}

impl SequenceScorer for TieHeavyScorer {
    fn next_token_logprobs(&self, _: &[String], prefix: &[String], allowed: &[&str]) -> BTreeMap<String, f64> {
        allowed
            .iter()
            .map(|t| (t.to_string(), self.logprob(prefix, t)))
            .collect()
    }
}

/// Up to `max_leaves` identifiers of 1..=`max_depth` tokens over a small
/// alphabet, so prefixes are shared and sequences collide.
pub fn random_identifiers(rng: &mut impl Rng, max_leaves: usize, max_depth: usize) -> Vec<Identifier> {
    let alphabet = ["a", "b", "c", "d"];
    let n = rng.gen_range(1..=max_leaves);
    (0..n)
        .map(|i| {
            let len = rng.gen_range(1..=max_depth);
            Identifier {
                doc_id: format!("doc{i}"),
                ordinal: i as u64,
                tokens: (0..len)
                    .map(|_| alphabet[rng.gen_range(0..alphabet.len())].to_string())
                    .collect(),
            }
        })
        .collect()
}

/// Every identifier in the trie, scored token by token and sorted by
/// score descending, then tokens ascending.
pub fn exhaustive(trie: &IdentifierTrie, scorer: &dyn SequenceScorer) -> Vec<Hypothesis> {
    let mut out: Vec<Hypothesis> = trie
        .entries()
        .iter()
        .map(|e| {
            let mut score = 0.0;
            for i in 0..e.tokens.len() {
                let prefix = &e.tokens[..i];
                let allowed = trie.allowed_next(prefix).expect("stored prefix").tokens;
                let lps = scorer.next_token_logprobs(&[], prefix, &allowed);
                score += lps[&e.tokens[i]];
            }
            Hypothesis {
                tokens: e.tokens.clone(),
                score,
            }
        })
        .collect();
    out.sort_by(hypothesis_order);
    out
}

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic")
}

/// A shipped fixture config whose outputs are redirected under `out`.
pub fn fixture_config(name: &str, out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::load(fixture_dir().join(format!("{name}.json"))).expect("shipped config");
    cfg.paths.output_dir = out.join(name);
    cfg.paths.artifacts_dir = Some(out.join("artifacts"));
    cfg
}
