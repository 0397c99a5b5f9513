//! Next-token scoring for constrained decoding.
//!
//! [`ReferenceScorer`] is a count-based decoder: a mixture of an add-one
//! bigram model, an add-one unigram model, and a context-overlap term, each
//! renormalized over the tokens the trie allows at the current step.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::SEP_TOKEN;

pub const SCORER_HEADER: &str = "CLARIFYIR-SCORER v1";

/// Start-of-identifier marker used as the bigram history of the first token.
pub const BOS_TOKEN: &str = "<s>";

/// Source of next-token log-probabilities.
///
/// Implementations must be deterministic in their inputs and return keys
/// only from `allowed`. Tokens left out of the map, or given a non-finite
/// value, are never expanded.
pub trait SequenceScorer: Sync {
    fn next_token_logprobs(&self, context: &[String], prefix: &[String], allowed: &[&str]) -> BTreeMap<String, f64>;
}

/// Mixture weights: bigram, unigram, context overlap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lambdas {
    pub bigram: f64,
    pub unigram: f64,
    pub overlap: f64,
}

impl Default for Lambdas {
    fn default() -> Self {
        Lambdas {
            bigram: 0.4,
            unigram: 0.2,
            overlap: 0.4,
        }
    }
}

impl Lambdas {
    pub fn new(bigram: f64, unigram: f64, overlap: f64) -> Result<Self> {
        let l = Lambdas {
            bigram,
            unigram,
            overlap,
        };
        let all = [bigram, unigram, overlap];
        if all.iter().any(|x| !x.is_finite() || *x < 0.0) || (all.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "lambdas must be >= 0 and sum to 1, got {all:?}"
            )));
        }
        Ok(l)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceScorer {
    lambdas: Lambdas,
    unigram: BTreeMap<String, u64>,
    /// previous token → next token → count
    bigram: BTreeMap<String, BTreeMap<String, u64>>,
}

/// A (context, target) decoder training example.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPair {
    pub context: Vec<String>,
    pub target: Vec<String>,
}

/// Counts unigrams and bigrams over the identifier segments of every target.
///
/// `[SEP]` ends a segment and is not itself counted; each segment starts from
/// [`BOS_TOKEN`]. The n-gram statistics do not depend on the training
/// contexts; the context only enters through the overlap term at decode time.
pub fn train_reference_scorer(pairs: &[TrainingPair], lambdas: Lambdas) -> Result<ReferenceScorer> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("no training pairs".into()));
    }
    let lambdas = Lambdas::new(lambdas.bigram, lambdas.unigram, lambdas.overlap)?;
    let mut unigram: BTreeMap<String, u64> = BTreeMap::new();
    let mut bigram: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    for pair in pairs {
        for segment in pair.target.split(|t| t == SEP_TOKEN) {
            let mut prev = BOS_TOKEN;
            for tok in segment {
                *unigram.entry(tok.clone()).or_insert(0) += 1;
                *bigram
                    .entry(prev.to_string())
                    .or_default()
                    .entry(tok.clone())
                    .or_insert(0) += 1;
                prev = tok;
            }
        }
    }
    Ok(ReferenceScorer {
        lambdas,
        unigram,
        bigram,
    })
}

/// Normalizes positive weights to a distribution.
fn normalize(raw: Vec<f64>) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

impl ReferenceScorer {
    pub fn lambdas(&self) -> Lambdas {
        self.lambdas
    }

    pub fn unigram_count(&self, tok: &str) -> u64 {
        self.unigram.get(tok).copied().unwrap_or(0)
    }

    pub fn bigram_count(&self, prev: &str, tok: &str) -> u64 {
        self.bigram.get(prev).and_then(|m| m.get(tok)).copied().unwrap_or(0)
    }

    /// Mixture probabilities over `allowed`, in the same order.
    pub fn mixture(&self, context: &[String], prefix: &[String], allowed: &[&str]) -> Vec<f64> {
        if allowed.is_empty() {
            return Vec::new();
        }
        let prev = prefix.last().map_or(BOS_TOKEN, String::as_str);
        let bigram = normalize(
            allowed
                .iter()
                .map(|t| (self.bigram_count(prev, t) + 1) as f64)
                .collect(),
        );
        let unigram = normalize(allowed.iter().map(|t| (self.unigram_count(t) + 1) as f64).collect());
        let mut ctx_counts: HashMap<&str, u64> = HashMap::new();
        for tok in context {
            *ctx_counts.entry(tok.as_str()).or_insert(0) += 1;
        }
        let denom = (context.len() + allowed.len()) as f64;
        let overlap = normalize(
            allowed
                .iter()
                .map(|t| (1 + ctx_counts.get(t).copied().unwrap_or(0)) as f64 / denom)
                .collect(),
        );
        let l = self.lambdas;
        (0..allowed.len())
            .map(|i| l.bigram * bigram[i] + l.unigram * unigram[i] + l.overlap * overlap[i])
            .collect()
    }

    pub fn to_persisted_string(&self) -> String {
        let body = serde_json::to_string(self).expect("scorer serialization is infallible");
        format!("{SCORER_HEADER}\n{body}\n")
    }

    pub fn from_persisted_str(data: &str, origin: &str) -> Result<Self> {
        let (header, body) = data.split_once('\n').unwrap_or((data, ""));
        if header.trim_end() != SCORER_HEADER {
            return Err(Error::Header {
                expected: SCORER_HEADER.to_string(),
                found: header.chars().take(40).collect(),
            });
        }
        let scorer: ReferenceScorer = serde_json::from_str(body)
            .map_err(|e| Error::parse(format!("{origin}:{}:{}", e.line() + 1, e.column()), e))?;
        Lambdas::new(scorer.lambdas.bigram, scorer.lambdas.unigram, scorer.lambdas.overlap)?;
        Ok(scorer)
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

impl SequenceScorer for ReferenceScorer {
    fn next_token_logprobs(&self, context: &[String], prefix: &[String], allowed: &[&str]) -> BTreeMap<String, f64> {
        allowed
            .iter()
            .zip(self.mixture(context, prefix, allowed))
            .map(|(t, p)| (t.to_string(), p.ln()))
            .collect()
    }
}

/// Equal log-probability for every allowed token.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformScorer;

impl SequenceScorer for UniformScorer {
    fn next_token_logprobs(&self, _: &[String], _: &[String], allowed: &[&str]) -> BTreeMap<String, f64> {
        let lp = -(allowed.len() as f64).ln();
        allowed.iter().map(|t| (t.to_string(), lp)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn s(t: &[&str]) -> Vec<String> {
        t.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn single_pair_hand_mixture() {
        let scorer = train_reference_scorer(
            &[TrainingPair {
                context: s(&["c"]),
                target: s(&["a", "b"]),
            }],
            Lambdas::default(),
        )
        .unwrap();
        // First step over {a, x}: bigram 2/3 vs 1/3, unigram 2/3 vs 1/3,
        // overlap (1/3)/(2/3) = 1/2 each for a context of one unrelated token.
        let lp = scorer.next_token_logprobs(&s(&["c"]), &[], &["a", "x"]);
        assert_abs_diff_eq!(
            lp["a"],
            (0.4 * 2.0 / 3.0 + 0.2 * 2.0 / 3.0 + 0.4 * 0.5f64).ln(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(lp["x"], 0.4f64.ln(), epsilon = 1e-12);
        // A forced step has probability one.
        let forced = scorer.next_token_logprobs(&s(&["c"]), &s(&["a"]), &["b"]);
        assert_abs_diff_eq!(forced["b"], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn overlap_only_prefers_context_tokens() {
        let scorer = train_reference_scorer(
            &[TrainingPair {
                context: vec![],
                target: s(&["bike"]),
            }],
            Lambdas::new(0.0, 0.0, 1.0).unwrap(),
        )
        .unwrap();
        let ctx = s(&["fix", "chain"]);
        let lp = scorer.next_token_logprobs(&ctx, &[], &["bike", "chain", "wheel"]);
        let best = lp.iter().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        assert_eq!(best.0, "chain");
    }

    #[test]
    fn without_overlap_the_context_is_ignored() {
        let scorer = train_reference_scorer(
            &[TrainingPair {
                context: s(&["q"]),
                target: s(&["a", "b", "[SEP]", "a", "c"]),
            }],
            Lambdas::new(0.5, 0.5, 0.0).unwrap(),
        )
        .unwrap();
        let allowed = ["a", "b", "c"];
        let x = scorer.next_token_logprobs(&s(&["a", "a", "a"]), &s(&["a"]), &allowed);
        let y = scorer.next_token_logprobs(&s(&["zzz"]), &s(&["a"]), &allowed);
        assert_eq!(x, y);
        assert_eq!(scorer.bigram_count(BOS_TOKEN, "a"), 2);
        assert_eq!(scorer.unigram_count("[SEP]"), 0);
    }

    #[test]
    fn mixture_is_a_distribution() {
        let scorer = train_reference_scorer(
            &[TrainingPair {
                context: vec![],
                target: s(&["a", "b"]),
            }],
            Lambdas::default(),
        )
        .unwrap();
        let p = scorer.mixture(&s(&["a", "q", "a"]), &s(&["a"]), &["a", "b", "c", "d"]);
        assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(scorer.mixture(&[], &[], &[]).is_empty());
    }

    #[test]
    fn bad_lambdas_and_empty_training() {
        assert!(Lambdas::new(0.5, 0.5, 0.5).is_err());
        assert!(Lambdas::new(-0.1, 0.6, 0.5).is_err());
        assert!(train_reference_scorer(&[], Lambdas::default()).is_err());
    }

    #[test]
    fn persisted_round_trip() {
        let scorer = train_reference_scorer(
            &[TrainingPair {
                context: vec![],
                target: s(&["a", "b", "[SEP]", "c"]),
            }],
            Lambdas::default(),
        )
        .unwrap();
        let text = scorer.to_persisted_string();
        assert!(text.starts_with("CLARIFYIR-SCORER v1\n"));
        assert_eq!(ReferenceScorer::from_persisted_str(&text, "mem").unwrap(), scorer);
        assert!(ReferenceScorer::from_persisted_str("nope\n{}", "mem").is_err());
    }
}
