use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    /// Stable corpus position; also the tie-breaker for every ranking.
    pub ordinal: u64,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, ordinal: u64, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            ordinal,
            text: text.into(),
            title: None,
        }
    }
}

/// Documents with unique ids and ordinals, kept in ascending ordinal order.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    docs: Vec<Document>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(mut docs: Vec<Document>) -> Result<Self> {
        docs.sort_by_key(|d| d.ordinal);
        let mut by_id = HashMap::with_capacity(docs.len());
        for (i, doc) in docs.iter().enumerate() {
            if i > 0 && docs[i - 1].ordinal == doc.ordinal {
                return Err(Error::Duplicate {
                    kind: "document ordinal",
                    id: doc.ordinal.to_string(),
                });
            }
            if doc.text.trim().is_empty() {
                return Err(Error::Invariant(format!("document '{}' has empty text", doc.id)));
            }
            if by_id.insert(doc.id.clone(), i).is_some() {
                return Err(Error::Duplicate {
                    kind: "document",
                    id: doc.id.clone(),
                });
            }
        }
        Ok(Corpus { docs, by_id })
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.by_id.get(id).map(|&i| &self.docs[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    pub fn docs(&self) -> &[Document] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Document> {
        self.docs.iter()
    }
}

pub fn parse_corpus(reader: impl BufRead, origin: &str) -> Result<Corpus> {
    let mut docs = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::parse(format!("{origin}:{}", n + 1), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document =
            serde_json::from_str(&line).map_err(|e| Error::parse(format!("{origin}:{}:{}", n + 1, e.column()), e))?;
        docs.push(doc);
    }
    Corpus::new(docs)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(BufReader::new(file), &path.display().to_string())
}

pub fn write_corpus(path: impl AsRef<Path>, docs: &[Document]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for doc in docs {
        out.push_str(&serde_json::to_string(doc).expect("document serialization is infallible"));
        out.push('\n');
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_jsonl_with_optional_title() {
        let data = "{\"id\":\"d1\",\"ordinal\":1,\"text\":\"cat sat\"}\n\n{\"id\":\"d0\",\"ordinal\":0,\"text\":\"dog\",\"title\":\"Dogs\"}\n";
        let corpus = parse_corpus(data.as_bytes(), "c.jsonl").unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.docs()[0].id, "d0");
        assert_eq!(corpus.get("d0").unwrap().title.as_deref(), Some("Dogs"));
    }

    #[test]
    fn rejects_duplicates_and_empty_text() {
        let dup_id = "{\"id\":\"d1\",\"ordinal\":1,\"text\":\"a\"}\n{\"id\":\"d1\",\"ordinal\":2,\"text\":\"b\"}";
        assert!(matches!(
            parse_corpus(dup_id.as_bytes(), "x"),
            Err(Error::Duplicate { .. })
        ));
        let dup_ord = "{\"id\":\"d1\",\"ordinal\":1,\"text\":\"a\"}\n{\"id\":\"d2\",\"ordinal\":1,\"text\":\"b\"}";
        assert!(matches!(
            parse_corpus(dup_ord.as_bytes(), "x"),
            Err(Error::Duplicate { .. })
        ));
        let empty = "{\"id\":\"d1\",\"ordinal\":1,\"text\":\"  \"}";
        assert!(matches!(parse_corpus(empty.as_bytes(), "x"), Err(Error::Invariant(_))));
    }

    #[test]
    fn malformed_line_is_located() {
        let data = "{\"id\":\"d1\",\"ordinal\":1,\"text\":\"a\"}\n{\"id\":\"d2\"}";
        let err = parse_corpus(data.as_bytes(), "c.jsonl").unwrap_err().to_string();
        assert!(err.contains("c.jsonl:2"), "{err}");
    }
}
