use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genret::trie::{IdentifierTrie, NodeId, ROOT};
use crate::genret::SequenceScorer;
use crate::retrieval::{RankedList, ScoredDoc};

pub const DEFAULT_BEAM_SIZE: usize = 15;

/// A completed identifier with its summed token log-probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub tokens: Vec<String>,
    pub score: f64,
}

/// Score descending, then lexicographic token order.
pub fn hypothesis_order(a: &Hypothesis, b: &Hypothesis) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.tokens.cmp(&b.tokens))
}

struct Beam {
    hyp: Hypothesis,
    node: NodeId,
}

/// Beam search whose expansions are restricted to trie continuations.
///
/// Each step expands every live beam by the tokens the trie allows, keeps
/// the best `beam_size` expansions, and records those that complete an
/// identifier. A completed prefix that still has children stays live, since
/// another identifier may extend it. Scores are raw log-probability sums.
pub fn constrained_beam_search(
    scorer: &dyn SequenceScorer,
    context: &[String],
    trie: &IdentifierTrie,
    beam_size: usize,
    max_len: usize,
) -> Result<Vec<Hypothesis>> {
    if beam_size == 0 {
        return Err(Error::InvalidArgument("beam size must be >= 1".into()));
    }
    let mut live = vec![Beam {
        hyp: Hypothesis {
            tokens: Vec::new(),
            score: 0.0,
        },
        node: ROOT,
    }];
    let mut finished: Vec<Hypothesis> = Vec::new();
    for _ in 0..max_len {
        let mut expansions: Vec<Beam> = Vec::new();
        for beam in &live {
            let children: Vec<(&str, NodeId)> = trie.children(beam.node).collect();
            if children.is_empty() {
                continue;
            }
            let allowed: Vec<&str> = children.iter().map(|(t, _)| *t).collect();
            let logprobs = scorer.next_token_logprobs(context, &beam.hyp.tokens, &allowed);
            for (tok, child) in children {
                let Some(&lp) = logprobs.get(tok) else { continue };
                if !lp.is_finite() {
                    continue;
                }
                let mut tokens = beam.hyp.tokens.clone();
                tokens.push(tok.to_string());
                expansions.push(Beam {
                    hyp: Hypothesis {
                        tokens,
                        score: beam.hyp.score + lp,
                    },
                    node: child,
                });
            }
        }
        expansions.sort_by(|a, b| hypothesis_order(&a.hyp, &b.hyp));
        expansions.truncate(beam_size);
        live = Vec::with_capacity(expansions.len());
        for beam in expansions {
            if trie.terminal(beam.node).is_some() {
                finished.push(beam.hyp.clone());
            }
            if trie.has_children(beam.node) {
                live.push(beam);
            }
        }
        if live.is_empty() {
            break;
        }
    }
    finished.sort_by(hypothesis_order);
    finished.truncate(beam_size);
    Ok(finished)
}

/// Generative ranking over documents.
pub type GenRanking = RankedList;

/// Orders documents by their best beam score (ties: first-stage rank, then
/// ordinal), then appends the remaining first-stage candidates in their
/// original order with a score of negative infinity.
pub fn rank_candidates(beams: &[Hypothesis], trie: &IdentifierTrie, first_stage: &RankedList) -> Result<GenRanking> {
    let mut best: HashMap<&str, (f64, u64)> = HashMap::new();
    for hyp in beams {
        let entry = trie
            .resolve(&hyp.tokens)
            .map_err(|e| Error::Invariant(format!("beam output {:?} escaped the trie: {e}", hyp.tokens)))?;
        best.entry(entry.doc_id.as_str())
            .and_modify(|(s, _)| *s = s.max(hyp.score))
            .or_insert((hyp.score, entry.ordinal));
    }
    let first_rank: HashMap<&str, usize> = first_stage.doc_ids().enumerate().map(|(r, d)| (d, r)).collect();
    let mut generated: Vec<ScoredDoc> = best
        .iter()
        .map(|(&doc, &(score, ordinal))| ScoredDoc {
            doc_id: doc.to_string(),
            ordinal,
            score,
        })
        .collect();
    generated.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| {
                let ra = first_rank.get(a.doc_id.as_str()).copied().unwrap_or(usize::MAX);
                let rb = first_rank.get(b.doc_id.as_str()).copied().unwrap_or(usize::MAX);
                ra.cmp(&rb)
            })
            .then(a.ordinal.cmp(&b.ordinal))
    });
    let rest = first_stage
        .entries()
        .iter()
        .filter(|d| !best.contains_key(d.doc_id.as_str()))
        .map(|d| ScoredDoc {
            score: f64::NEG_INFINITY,
            ..d.clone()
        });
    generated.extend(rest);
    Ok(GenRanking::from_ordered(generated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genret::{build_trie, Identifier, UniformScorer};
    use std::collections::BTreeMap;

    fn ident(doc: &str, ordinal: u64, tokens: &[&str]) -> Identifier {
        Identifier {
            doc_id: doc.into(),
            ordinal,
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
        }
    }

    fn s(t: &[&str]) -> Vec<String> {
        t.iter().map(|x| x.to_string()).collect()
    }

    struct Peaked(Vec<String>);

    impl SequenceScorer for Peaked {
        fn next_token_logprobs(&self, _: &[String], prefix: &[String], allowed: &[&str]) -> BTreeMap<String, f64> {
            allowed
                .iter()
                .map(|t| {
                    let on_path = self.0.get(prefix.len()).is_some_and(|p| p == t) && self.0.starts_with(prefix);
                    (t.to_string(), if on_path { 0.0 } else { f64::NEG_INFINITY })
                })
                .collect()
        }
    }

    #[test]
    fn uniform_three_leaves() {
        let trie = build_trie(&[ident("c", 3, &["c"]), ident("a", 1, &["a"]), ident("b", 2, &["b"])]);
        let out = constrained_beam_search(&UniformScorer, &[], &trie, 3, 4).unwrap();
        let lp = -(3f64).ln();
        assert_eq!(
            out,
            vec![
                Hypothesis {
                    tokens: s(&["a"]),
                    score: lp
                },
                Hypothesis {
                    tokens: s(&["b"]),
                    score: lp
                },
                Hypothesis {
                    tokens: s(&["c"]),
                    score: lp
                },
            ]
        );
    }

    #[test]
    fn peaked_scorer_follows_its_path() {
        let trie = build_trie(&[
            ident("d1", 1, &["a", "b"]),
            ident("d2", 2, &["a", "c"]),
            ident("d3", 3, &["x"]),
        ]);
        let out = constrained_beam_search(&Peaked(s(&["a", "b"])), &[], &trie, 5, 4).unwrap();
        assert_eq!(
            out,
            vec![Hypothesis {
                tokens: s(&["a", "b"]),
                score: 0.0
            }]
        );
    }

    #[test]
    fn empty_trie_and_zero_beam() {
        let trie = build_trie(&[]);
        assert!(constrained_beam_search(&UniformScorer, &[], &trie, 3, 4)
            .unwrap()
            .is_empty());
        assert!(constrained_beam_search(&UniformScorer, &[], &trie, 0, 4).is_err());
    }

    #[test]
    fn terminal_with_children_is_emitted_and_extended() {
        let trie = build_trie(&[ident("d1", 1, &["a"]), ident("d2", 2, &["a"])]);
        let out = constrained_beam_search(&UniformScorer, &[], &trie, 5, 3).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].tokens, s(&["a"]));
        assert_eq!(out[1].tokens, s(&["a", "d2"]));
    }

    #[test]
    fn beam_limits_results() {
        let trie = build_trie(&[ident("c", 3, &["c"]), ident("a", 1, &["a"]), ident("b", 2, &["b"])]);
        let out = constrained_beam_search(&UniformScorer, &[], &trie, 2, 4).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[1].tokens, s(&["b"]));
    }

    fn first_stage(ids: &[&str]) -> RankedList {
        RankedList::from_unsorted(
            ids.iter()
                .enumerate()
                .map(|(i, d)| ScoredDoc {
                    doc_id: d.to_string(),
                    ordinal: i as u64 + 1,
                    score: 10.0 - i as f64,
                })
                .collect(),
        )
        .unwrap()
    }

    fn five_doc_trie() -> IdentifierTrie {
        build_trie(
            &(1..=5)
                .map(|i| ident(&format!("d{i}"), i, &[&format!("k{i}")]))
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn beams_then_first_stage_remainder() {
        let trie = five_doc_trie();
        let beams = vec![
            Hypothesis {
                tokens: s(&["k5"]),
                score: -0.3,
            },
            Hypothesis {
                tokens: s(&["k2"]),
                score: -0.1,
            },
        ];
        let fs = first_stage(&["d1", "d2", "d3", "d4", "d5"]);
        let ranking = rank_candidates(&beams, &trie, &fs).unwrap();
        assert_eq!(
            ranking.doc_ids().collect::<Vec<_>>(),
            vec!["d2", "d5", "d1", "d3", "d4"]
        );
        assert_eq!(ranking.entries()[2].score, f64::NEG_INFINITY);
    }

    #[test]
    fn empty_beams_keep_first_stage_order() {
        let fs = first_stage(&["d3", "d1", "d2"]);
        let ranking = rank_candidates(&[], &five_doc_trie(), &fs).unwrap();
        assert_eq!(ranking.doc_ids().collect::<Vec<_>>(), vec!["d3", "d1", "d2"]);
    }

    #[test]
    fn repeated_doc_scored_once_at_max() {
        let trie = build_trie(&[ident("d1", 1, &["a"]), ident("d2", 2, &["b"])]);
        // Two sequences owned by the same doc cannot come from one trie, so
        // feed the same sequence twice with different scores.
        let beams = vec![
            Hypothesis {
                tokens: s(&["a"]),
                score: -2.0,
            },
            Hypothesis {
                tokens: s(&["b"]),
                score: -1.0,
            },
            Hypothesis {
                tokens: s(&["a"]),
                score: -0.5,
            },
        ];
        let ranking = rank_candidates(&beams, &trie, &first_stage(&["d1", "d2"])).unwrap();
        assert_eq!(ranking.len(), 2);
        assert_eq!(ranking.entries()[0].doc_id, "d1");
        assert_eq!(ranking.entries()[0].score, -0.5);
    }

    #[test]
    fn unresolvable_beam_is_hard_error() {
        let beams = vec![Hypothesis {
            tokens: s(&["zz"]),
            score: 0.0,
        }];
        assert!(rank_candidates(&beams, &five_doc_trie(), &first_stage(&["d1"])).is_err());
    }

    #[test]
    fn ties_fall_back_to_first_stage_rank() {
        let trie = five_doc_trie();
        let beams = vec![
            Hypothesis {
                tokens: s(&["k1"]),
                score: -1.0,
            },
            Hypothesis {
                tokens: s(&["k4"]),
                score: -1.0,
            },
        ];
        let fs = first_stage(&["d4", "d1"]);
        let ranking = rank_candidates(&beams, &trie, &fs).unwrap();
        assert_eq!(ranking.doc_ids().collect::<Vec<_>>(), vec!["d4", "d1"]);
    }
}
