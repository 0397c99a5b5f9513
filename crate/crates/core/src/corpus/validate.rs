use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::corpus::{Corpus, Dataset, Qrels, MAX_IMAGES_PER_QUESTION};

/// One consistency problem found in the inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "finding", rename_all = "snake_case")]
pub enum Finding {
    DuplicateId {
        kind: &'static str,
        id: String,
    },
    DanglingReference {
        kind: &'static str,
        id: String,
        referrer: String,
    },
    EmptyQuery {
        topic_id: String,
    },
    ImagesOnTextQuestion {
        question_id: String,
        images: usize,
    },
    ImageCount {
        question_id: String,
        images: usize,
    },
    UnknownDocument {
        facet_id: String,
        doc_id: String,
    },
    UnknownFacet {
        facet_id: String,
    },
    NoRelevantDocument {
        facet_id: String,
    },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::DuplicateId { kind, id } => write!(f, "duplicate {kind} id '{id}'"),
            Finding::DanglingReference { kind, id, referrer } => {
                write!(f, "{referrer} references unknown {kind} '{id}'")
            }
            Finding::EmptyQuery { topic_id } => write!(f, "topic '{topic_id}' has an empty query"),
            Finding::ImagesOnTextQuestion { question_id, images } => write!(
                f,
                "question '{question_id}' is not multimodal but carries {images} image(s)"
            ),
            Finding::ImageCount { question_id, images } => write!(
                f,
                "image count: question '{question_id}' has {images} images (max {MAX_IMAGES_PER_QUESTION})"
            ),
            Finding::UnknownDocument { facet_id, doc_id } => {
                write!(f, "unknown document '{doc_id}' judged for facet '{facet_id}'")
            }
            Finding::UnknownFacet { facet_id } => {
                write!(f, "qrels judge unknown facet '{facet_id}'")
            }
            Finding::NoRelevantDocument { facet_id } => {
                write!(f, "facet '{facet_id}' has judgments but no positive grade")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_consistent(&self) -> bool {
        self.findings.is_empty()
    }
}

fn duplicates<'a>(kind: &'static str, ids: impl Iterator<Item = &'a str>, out: &mut Vec<Finding>) {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            out.push(Finding::DuplicateId {
                kind,
                id: id.to_string(),
            });
        }
    }
}

/// Invariant violations inside the dataset alone, in a stable order.
pub(crate) fn dataset_findings(ds: &Dataset) -> Vec<Finding> {
    let mut out = Vec::new();
    duplicates("topic", ds.topics.iter().map(|t| t.id.as_str()), &mut out);
    duplicates("facet", ds.facets.iter().map(|f| f.id.as_str()), &mut out);
    duplicates("question", ds.questions.iter().map(|q| q.id.as_str()), &mut out);
    duplicates(
        "image",
        ds.questions.iter().flat_map(|q| q.images.iter().map(|i| i.id.as_str())),
        &mut out,
    );

    for topic in &ds.topics {
        if topic.query.trim().is_empty() {
            out.push(Finding::EmptyQuery {
                topic_id: topic.id.clone(),
            });
        }
    }
    let dangling_topic = |id: &str, referrer: String| Finding::DanglingReference {
        kind: "topic",
        id: id.to_string(),
        referrer,
    };
    for facet in &ds.facets {
        if ds.topic(&facet.topic_id).is_none() {
            out.push(dangling_topic(&facet.topic_id, format!("facet '{}'", facet.id)));
        }
    }
    for q in &ds.questions {
        if ds.topic(&q.topic_id).is_none() {
            out.push(dangling_topic(&q.topic_id, format!("question '{}'", q.id)));
        }
        if !q.multimodal && !q.images.is_empty() {
            out.push(Finding::ImagesOnTextQuestion {
                question_id: q.id.clone(),
                images: q.images.len(),
            });
        }
        if q.images.len() > MAX_IMAGES_PER_QUESTION {
            out.push(Finding::ImageCount {
                question_id: q.id.clone(),
                images: q.images.len(),
            });
        }
    }
    for (n, a) in ds.answers.iter().enumerate() {
        let referrer = || format!("answer #{n}");
        if ds.topic(&a.topic_id).is_none() {
            out.push(dangling_topic(&a.topic_id, referrer()));
        }
        if ds.facet(&a.facet_id).is_none() {
            out.push(Finding::DanglingReference {
                kind: "facet",
                id: a.facet_id.clone(),
                referrer: referrer(),
            });
        }
        if ds.question(&a.question_id).is_none() {
            out.push(Finding::DanglingReference {
                kind: "question",
                id: a.question_id.clone(),
                referrer: referrer(),
            });
        }
    }
    out
}

/// Every invariant violation across dataset, judgments and corpus.
pub fn validate_dataset(dataset: &Dataset, qrels: &Qrels, corpus: &Corpus) -> ValidationReport {
    let mut findings = dataset_findings(dataset);
    for (facet_id, grades) in qrels.facets() {
        if dataset.facet(facet_id).is_none() {
            findings.push(Finding::UnknownFacet {
                facet_id: facet_id.clone(),
            });
        }
        if !grades.values().any(|&g| g > 0) {
            findings.push(Finding::NoRelevantDocument {
                facet_id: facet_id.clone(),
            });
        }
        for doc_id in grades.keys() {
            if !corpus.contains(doc_id) {
                findings.push(Finding::UnknownDocument {
                    facet_id: facet_id.clone(),
                    doc_id: doc_id.clone(),
                });
            }
        }
    }
    ValidationReport { findings }
}
