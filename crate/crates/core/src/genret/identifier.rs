use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document, Qrels};
use crate::error::{Error, Result};
use crate::retrieval::InvertedIndex;
use crate::text::{is_stopword, tokenize, SEP_TOKEN};

/// Number of tokens in first-words and keyword identifiers.
pub const IDENTIFIER_LEN: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentifierStrategy {
    /// Document number: the single token `d<ordinal>`.
    DocN,
    /// First five tokens of the text.
    DocF5,
    /// Top five tf-idf keywords.
    #[default]
    DocK,
}

/// Token sequence standing for one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Identifier {
    pub doc_id: String,
    pub ordinal: u64,
    pub tokens: Vec<String>,
}

/// The document-number token, also used to disambiguate colliding identifiers.
pub fn ordinal_token(ordinal: u64) -> String {
    format!("d{ordinal}")
}

/// Top-`k` tokens of `doc` by `tf * ln(N / df)`, stopwords removed,
/// ties broken lexicographically.
pub fn extract_keywords(doc: &Document, index: &InvertedIndex, k: usize) -> Result<Vec<String>> {
    if k == 0 {
        return Err(Error::InvalidArgument("keyword count must be >= 1".into()));
    }
    if !index.contains(&doc.id) {
        return Err(Error::UnknownDocument(doc.id.clone()));
    }
    let mut tf: BTreeMap<String, u32> = BTreeMap::new();
    for tok in tokenize(&doc.text) {
        if !is_stopword(&tok) {
            *tf.entry(tok).or_insert(0) += 1;
        }
    }
    if tf.is_empty() {
        return Err(Error::NoEligibleTokens(doc.id.clone()));
    }
    let n = index.num_docs() as f64;
    let mut scored: Vec<(String, f64)> = tf
        .into_iter()
        .map(|(tok, count)| {
            let df = index.df(&tok).max(1) as f64;
            let score = count as f64 * (n / df).ln();
            (tok, score)
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(scored.into_iter().map(|(tok, _)| tok).collect())
}

pub fn make_identifier(doc: &Document, strategy: IdentifierStrategy, index: &InvertedIndex) -> Result<Identifier> {
    let tokens = match strategy {
        IdentifierStrategy::DocN => vec![ordinal_token(doc.ordinal)],
        IdentifierStrategy::DocF5 => {
            let mut toks = tokenize(&doc.text);
            if toks.is_empty() {
                return Err(Error::NoEligibleTokens(doc.id.clone()));
            }
            toks.truncate(IDENTIFIER_LEN);
            toks
        }
        IdentifierStrategy::DocK => extract_keywords(doc, index, IDENTIFIER_LEN)?,
    };
    Ok(Identifier {
        doc_id: doc.id.clone(),
        ordinal: doc.ordinal,
        tokens,
    })
}

pub fn make_identifiers(
    corpus: &Corpus,
    strategy: IdentifierStrategy,
    index: &InvertedIndex,
) -> Result<Vec<Identifier>> {
    corpus.iter().map(|d| make_identifier(d, strategy, index)).collect()
}

#[derive(Serialize, Deserialize)]
struct IdentifierLine {
    doc_id: String,
    tokens: Vec<String>,
    strategy: IdentifierStrategy,
}

/// JSON-lines identifier table, one `{"doc_id","tokens","strategy"}` per line.
pub fn identifiers_to_jsonl(identifiers: &[Identifier], strategy: IdentifierStrategy) -> String {
    let mut out = String::new();
    for id in identifiers {
        let line = IdentifierLine {
            doc_id: id.doc_id.clone(),
            tokens: id.tokens.clone(),
            strategy,
        };
        out.push_str(&serde_json::to_string(&line).expect("identifier serialization is infallible"));
        out.push('\n');
    }
    out
}

/// Reads an identifier table; ordinals are resolved against `corpus`.
pub fn parse_identifiers(
    reader: impl BufRead,
    corpus: &Corpus,
    origin: &str,
) -> Result<(Vec<Identifier>, Option<IdentifierStrategy>)> {
    let mut out = Vec::new();
    let mut strategy = None;
    for (n, line) in reader.lines().enumerate() {
        let location = format!("{origin}:{}", n + 1);
        let line = line.map_err(|e| Error::parse(&location, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: IdentifierLine = serde_json::from_str(&line).map_err(|e| Error::parse(&location, e))?;
        if rec.tokens.is_empty() {
            return Err(Error::parse(location, format!("empty identifier for '{}'", rec.doc_id)));
        }
        let doc = corpus.get(&rec.doc_id).ok_or_else(|| Error::DanglingReference {
            kind: "document",
            id: rec.doc_id.clone(),
            referrer: location.clone(),
        })?;
        strategy.get_or_insert(rec.strategy);
        out.push(Identifier {
            doc_id: rec.doc_id,
            ordinal: doc.ordinal,
            tokens: rec.tokens,
        });
    }
    Ok((out, strategy))
}

pub fn load_identifiers(path: impl AsRef<Path>, corpus: &Corpus) -> Result<Vec<Identifier>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_identifiers(BufReader::new(file), corpus, &path.display().to_string())?.0)
}

/// Decoder target for a facet: identifiers of its `top_n` best-graded
/// relevant documents (grade desc, ordinal asc) joined by `[SEP]`.
pub fn make_training_targets(
    facet_id: &str,
    qrels: &Qrels,
    identifiers: &HashMap<String, Identifier>,
    top_n: usize,
) -> Result<Vec<String>> {
    if top_n == 0 {
        return Err(Error::InvalidArgument("top_n must be >= 1".into()));
    }
    let grades = qrels
        .grades(facet_id)
        .ok_or_else(|| Error::NoRelevantDocuments(facet_id.to_string()))?;
    let mut relevant: Vec<(&Identifier, u32)> = grades
        .iter()
        .filter(|(_, &g)| g > 0)
        .filter_map(|(doc, &g)| identifiers.get(doc).map(|id| (id, g)))
        .collect();
    if relevant.is_empty() {
        return Err(Error::NoRelevantDocuments(facet_id.to_string()));
    }
    relevant.sort_by(|a, b| match b.1.cmp(&a.1) {
        Ordering::Equal => a.0.ordinal.cmp(&b.0.ordinal),
        other => other,
    });
    let mut target = Vec::new();
    for (i, (id, _)) in relevant.into_iter().take(top_n).enumerate() {
        if i > 0 {
            target.push(SEP_TOKEN.to_string());
        }
        target.extend(id.tokens.iter().cloned());
    }
    Ok(target)
}
