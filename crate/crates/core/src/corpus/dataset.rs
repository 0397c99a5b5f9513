//! Topics, facets, clarifying questions, images and answers.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::validate::{dataset_findings, Finding};
use crate::error::{Error, Result};

/// Maximum number of images attached to one clarifying question.
pub const MAX_IMAGES_PER_QUESTION: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    pub id: String,
    pub query: String,
}

/// One hidden information need behind a topic query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Facet {
    pub id: String,
    pub topic_id: String,
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestionSource {
    Set1,
    Set2,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub id: String,
    pub url: String,
    pub aspect: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClarifyingQuestion {
    pub id: String,
    pub topic_id: String,
    pub text: String,
    pub source: QuestionSource,
    pub multimodal: bool,
    #[serde(default)]
    pub images: Vec<ImageRecord>,
}

/// The user's answer to a question under a given facet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub topic_id: String,
    pub facet_id: String,
    pub question_id: String,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
struct DatasetFile {
    topics: Vec<Topic>,
    facets: Vec<Facet>,
    questions: Vec<ClarifyingQuestion>,
    answers: Vec<AnswerRecord>,
}

/// A loaded dataset with id lookups.
///
/// [`Dataset::new`] does not enforce invariants, so that inconsistent data
/// can still be handed to [`crate::corpus::validate_dataset`]. [`load_dataset`]
/// and [`Dataset::from_json_str`] reject anything that does not validate.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub topics: Vec<Topic>,
    pub facets: Vec<Facet>,
    pub questions: Vec<ClarifyingQuestion>,
    pub answers: Vec<AnswerRecord>,
    topic_idx: HashMap<String, usize>,
    facet_idx: HashMap<String, usize>,
    question_idx: HashMap<String, usize>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.topics == other.topics
            && self.facets == other.facets
            && self.questions == other.questions
            && self.answers == other.answers
    }
}

fn first_index<T>(items: &[T], id: impl Fn(&T) -> &str) -> HashMap<String, usize> {
    let mut map = HashMap::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        map.entry(id(item).to_string()).or_insert(i);
    }
    map
}

impl Dataset {
    pub fn new(
        topics: Vec<Topic>,
        facets: Vec<Facet>,
        questions: Vec<ClarifyingQuestion>,
        answers: Vec<AnswerRecord>,
    ) -> Self {
        let topic_idx = first_index(&topics, |t| &t.id);
        let facet_idx = first_index(&facets, |f| &f.id);
        let question_idx = first_index(&questions, |q| &q.id);
        Dataset {
            topics,
            facets,
            questions,
            answers,
            topic_idx,
            facet_idx,
            question_idx,
        }
    }

    pub fn from_json_str(json: &str, origin: &str) -> Result<Self> {
        let file: DatasetFile =
            serde_json::from_str(json).map_err(|e| Error::parse(format!("{origin}:{}:{}", e.line(), e.column()), e))?;
        let dataset = Dataset::new(file.topics, file.facets, file.questions, file.answers);
        dataset.check()?;
        Ok(dataset)
    }

    pub fn to_json_string(&self) -> String {
        let file = DatasetFile {
            topics: self.topics.clone(),
            facets: self.facets.clone(),
            questions: self.questions.clone(),
            answers: self.answers.clone(),
        };
        serde_json::to_string_pretty(&file).expect("dataset serialization is infallible")
    }

    /// Fails on the first invariant violation.
    pub fn check(&self) -> Result<()> {
        match dataset_findings(self).into_iter().next() {
            None => Ok(()),
            Some(finding) => Err(finding.into_error()),
        }
    }

    pub fn topic(&self, id: &str) -> Option<&Topic> {
        self.topic_idx.get(id).map(|&i| &self.topics[i])
    }

    pub fn facet(&self, id: &str) -> Option<&Facet> {
        self.facet_idx.get(id).map(|&i| &self.facets[i])
    }

    pub fn question(&self, id: &str) -> Option<&ClarifyingQuestion> {
        self.question_idx.get(id).map(|&i| &self.questions[i])
    }

    pub fn facets_of<'a>(&'a self, topic_id: &'a str) -> impl Iterator<Item = &'a Facet> + 'a {
        self.facets.iter().filter(move |f| f.topic_id == topic_id)
    }

    pub fn questions_of<'a>(&'a self, topic_id: &'a str) -> impl Iterator<Item = &'a ClarifyingQuestion> + 'a {
        self.questions.iter().filter(move |q| q.topic_id == topic_id)
    }

    /// (topics, facets, questions, answers)
    pub fn counts(&self) -> (usize, usize, usize, usize) {
        (
            self.topics.len(),
            self.facets.len(),
            self.questions.len(),
            self.answers.len(),
        )
    }
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Dataset::from_json_str(&json, &path.display().to_string())
}

impl Finding {
    fn into_error(self) -> Error {
        match self {
            Finding::DuplicateId { kind, id } => Error::Duplicate { kind, id },
            Finding::DanglingReference { kind, id, referrer } => Error::DanglingReference { kind, id, referrer },
            other => Error::Invariant(other.to_string()),
        }
    }
}
