use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::genret::identifier::{ordinal_token, Identifier};

/// Document owning a complete identifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrieEntry {
    pub doc_id: String,
    pub ordinal: u64,
    /// Stored token sequence, including any disambiguation suffix.
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, Default)]
struct Node {
    children: BTreeMap<String, usize>,
    terminal: Option<usize>,
}

pub(crate) type NodeId = usize;
pub(crate) const ROOT: NodeId = 0;

/// Prefix tree over identifier token sequences.
#[derive(Debug, Clone)]
pub struct IdentifierTrie {
    nodes: Vec<Node>,
    entries: Vec<TrieEntry>,
}

/// Result of [`IdentifierTrie::allowed_next`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NextTokens<'a> {
    pub tokens: Vec<&'a str>,
    pub terminal: Option<&'a str>,
}

impl Default for IdentifierTrie {
    fn default() -> Self {
        IdentifierTrie {
            nodes: vec![Node::default()],
            entries: Vec::new(),
        }
    }
}

impl IdentifierTrie {
    /// Inserts identifiers in ascending ordinal order. A sequence already
    /// owned by an earlier document gets `d<ordinal>` appended until it is
    /// free; repeated doc ids are ignored after their first occurrence.
    pub fn build<'a>(identifiers: impl IntoIterator<Item = &'a Identifier>) -> Self {
        let mut sorted: Vec<&Identifier> = identifiers.into_iter().collect();
        sorted.sort_by_key(|id| id.ordinal);
        let mut trie = IdentifierTrie::default();
        let mut seen = HashSet::new();
        for id in sorted {
            if !seen.insert(id.doc_id.as_str()) {
                log::warn!("identifier for '{}' given twice; keeping the first", id.doc_id);
                continue;
            }
            let mut tokens = id.tokens.clone();
            while tokens.is_empty() || trie.terminal_at(&tokens).is_some() {
                tokens.push(ordinal_token(id.ordinal));
            }
            trie.insert(TrieEntry {
                doc_id: id.doc_id.clone(),
                ordinal: id.ordinal,
                tokens,
            });
        }
        trie
    }

    fn insert(&mut self, entry: TrieEntry) {
        let mut node = ROOT;
        for tok in &entry.tokens {
            node = match self.nodes[node].children.get(tok) {
                Some(&child) => child,
                None => {
                    let child = self.nodes.len();
                    self.nodes.push(Node::default());
                    self.nodes[node].children.insert(tok.clone(), child);
                    child
                }
            };
        }
        self.nodes[node].terminal = Some(self.entries.len());
        self.entries.push(entry);
    }

    fn walk(&self, prefix: &[String]) -> Option<NodeId> {
        prefix
            .iter()
            .try_fold(ROOT, |node, tok| self.nodes[node].children.get(tok).copied())
    }

    fn terminal_at(&self, tokens: &[String]) -> Option<&TrieEntry> {
        self.walk(tokens)
            .and_then(|n| self.nodes[n].terminal)
            .map(|e| &self.entries[e])
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of stored identifiers (terminals).
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[TrieEntry] {
        &self.entries
    }

    pub fn max_depth(&self) -> usize {
        self.entries.iter().map(|e| e.tokens.len()).max().unwrap_or(0)
    }

    pub fn entry_for_doc(&self, doc_id: &str) -> Option<&TrieEntry> {
        self.entries.iter().find(|e| e.doc_id == doc_id)
    }

    /// Children of `prefix` and the document it completes, if any.
    pub fn allowed_next(&self, prefix: &[String]) -> Result<NextTokens<'_>> {
        let node = self.walk(prefix).ok_or_else(|| Error::InvalidPrefix(prefix.to_vec()))?;
        Ok(NextTokens {
            tokens: self.children(node).map(|(tok, _)| tok).collect(),
            terminal: self.terminal(node).map(|e| e.doc_id.as_str()),
        })
    }

    /// Owning document of a complete identifier.
    pub fn resolve(&self, tokens: &[String]) -> Result<&TrieEntry> {
        let node = self.walk(tokens).ok_or_else(|| Error::UnknownId(tokens.join(" ")))?;
        self.terminal(node)
            .ok_or_else(|| Error::IncompleteIdentifier(tokens.to_vec()))
    }

    pub(crate) fn children(&self, node: NodeId) -> impl Iterator<Item = (&str, NodeId)> {
        self.nodes[node].children.iter().map(|(t, &n)| (t.as_str(), n))
    }

    pub(crate) fn has_children(&self, node: NodeId) -> bool {
        !self.nodes[node].children.is_empty()
    }

    pub(crate) fn terminal(&self, node: NodeId) -> Option<&TrieEntry> {
        self.nodes[node].terminal.map(|e| &self.entries[e])
    }
}

pub fn build_trie<'a>(identifiers: impl IntoIterator<Item = &'a Identifier>) -> IdentifierTrie {
    IdentifierTrie::build(identifiers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashMap;

    pub(crate) fn ident(doc: &str, ordinal: u64, tokens: &[&str]) -> Identifier {
        Identifier {
            doc_id: doc.into(),
            ordinal,
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
        }
    }

    fn toks(t: &[&str]) -> Vec<String> {
        t.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn branching_and_lookup() {
        let trie = build_trie(&[ident("d1", 1, &["a", "b"]), ident("d2", 2, &["a", "c"])]);
        let root = trie.allowed_next(&[]).unwrap();
        assert_eq!(
            root,
            NextTokens {
                tokens: vec!["a"],
                terminal: None
            }
        );
        assert_eq!(trie.allowed_next(&toks(&["a"])).unwrap().tokens, vec!["b", "c"]);
        let leaf = trie.allowed_next(&toks(&["a", "b"])).unwrap();
        assert!(leaf.tokens.is_empty());
        assert_eq!(leaf.terminal, Some("d1"));
        assert!(matches!(trie.allowed_next(&toks(&["z"])), Err(Error::InvalidPrefix(_))));
    }

    #[test]
    fn resolve_cases() {
        let trie = build_trie(&[ident("d1", 1, &["a", "b"]), ident("d2", 2, &["a", "c"])]);
        assert_eq!(trie.resolve(&toks(&["a", "b"])).unwrap().doc_id, "d1");
        assert!(matches!(
            trie.resolve(&toks(&["a"])),
            Err(Error::IncompleteIdentifier(_))
        ));
        assert!(matches!(trie.resolve(&toks(&["q"])), Err(Error::UnknownId(_))));
    }

    #[test]
    fn collisions_get_ordinal_suffix() {
        let trie = build_trie(&[ident("d2", 2, &["a"]), ident("d1", 1, &["a"])]);
        assert_eq!(trie.resolve(&toks(&["a"])).unwrap().doc_id, "d1");
        assert_eq!(trie.resolve(&toks(&["a", "d2"])).unwrap().doc_id, "d2");
        let a = trie.allowed_next(&toks(&["a"])).unwrap();
        assert_eq!(
            a,
            NextTokens {
                tokens: vec!["d2"],
                terminal: Some("d1")
            }
        );
    }

    #[test]
    fn suffix_collision_keeps_appending() {
        let trie = build_trie(&[
            ident("x", 1, &["a"]),
            ident("y", 2, &["a", "d3"]),
            ident("z", 3, &["a"]),
        ]);
        assert_eq!(trie.resolve(&toks(&["a", "d3", "d3"])).unwrap().doc_id, "z");
        assert_eq!(trie.len(), 3);
    }

    #[test]
    fn empty_trie_is_root_only() {
        let trie = build_trie(&[]);
        assert!(trie.is_empty());
        assert_eq!(
            trie.allowed_next(&[]).unwrap(),
            NextTokens {
                tokens: vec![],
                terminal: None
            }
        );
    }

    proptest! {
        #[test]
        fn identifier_map_is_bijective(
            seqs in prop::collection::vec(prop::collection::vec(0usize..3, 0..4), 1..25)
        ) {
            const T: [&str; 3] = ["a", "b", "c"];
            let idents: Vec<Identifier> = seqs
                .iter()
                .enumerate()
                .map(|(i, s)| Identifier {
                    doc_id: format!("doc{i}"),
                    ordinal: i as u64,
                    tokens: s.iter().map(|&t| T[t].to_string()).collect(),
                })
                .collect();
            let trie = build_trie(&idents);
            prop_assert_eq!(trie.len(), idents.len());
            let mut owners = HashMap::new();
            for e in trie.entries() {
                prop_assert!(!e.tokens.is_empty());
                prop_assert_eq!(&trie.resolve(&e.tokens).unwrap().doc_id, &e.doc_id);
                prop_assert!(owners.insert(e.tokens.clone(), e.doc_id.clone()).is_none());
            }
            prop_assert!(trie.allowed_next(&[]).unwrap().terminal.is_none());
        }
    }
}
