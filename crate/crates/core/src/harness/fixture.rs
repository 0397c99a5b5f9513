//! Deterministic synthetic benchmark: 10 topics × 5 facets, 200 documents.
//!
//! Every facet owns three relevant documents (grades 2, 1, 1) built from
//! five private keywords each; every topic also owns five distractor
//! documents that repeat the topic words and so dominate a topic-only
//! ranking. Each facet has two clarifying questions:
//!
//! * a "set 1" text question whose answer names the top relevant document's
//!   first identifier keyword twice, with three unrelated images;
//! * a "set 2" picture question whose answer names that keyword once, with
//!   one image whose aspect names it again (plus the second relevant
//!   document's keyword) and two unrelated images.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{
    AnswerRecord, ClarifyingQuestion, Dataset, Document, Facet, ImageRecord, Qrels, QuestionSource, Topic,
};
use crate::error::{Error, Result};
use crate::text::is_stopword;

pub const TOPICS: usize = 10;
pub const FACETS_PER_TOPIC: usize = 5;
pub const RELEVANT_PER_FACET: usize = 3;
pub const DISTRACTORS_PER_TOPIC: usize = 5;
const KEYWORDS_PER_DOC: usize = 5;

pub const DEFAULT_FIXTURE_SEED: u64 = 20_231_021;

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

struct Words {
    rng: ChaCha8Rng,
    used: BTreeSet<String>,
}

impl Words {
    fn fresh(&mut self) -> String {
        loop {
            let syllables = self.rng.gen_range(2..=3);
            let mut w = String::new();
            for _ in 0..syllables {
                w.push(*CONSONANTS.choose(&mut self.rng).expect("non-empty") as char);
                w.push(*VOWELS.choose(&mut self.rng).expect("non-empty") as char);
            }
            if !is_stopword(&w) && self.used.insert(w.clone()) {
                return w;
            }
        }
    }

    fn many(&mut self, n: usize) -> Vec<String> {
        (0..n).map(|_| self.fresh()).collect()
    }
}

/// Dataset, documents and judgments of the benchmark.
#[derive(Debug, Clone)]
pub struct SyntheticFixture {
    pub dataset: Dataset,
    pub documents: Vec<Document>,
    pub qrels: Qrels,
}

fn doubled(words: &[String]) -> String {
    words
        .iter()
        .flat_map(|w| [w.as_str(), w.as_str()])
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn generate(seed: u64) -> Result<SyntheticFixture> {
    let mut words = Words {
        rng: ChaCha8Rng::seed_from_u64(seed),
        used: BTreeSet::new(),
    };
    let mut topics = Vec::new();
    let mut facets = Vec::new();
    let mut questions = Vec::new();
    let mut answers = Vec::new();
    let mut documents = Vec::new();
    let mut qrels = Qrels::new();

    let relevant_base = (TOPICS * DISTRACTORS_PER_TOPIC) as u64;
    for t in 0..TOPICS {
        let topic_id = format!("T{:02}", t + 1);
        let topic_words = words.many(2);
        let query = topic_words.join(" ");
        topics.push(Topic {
            id: topic_id.clone(),
            query: query.clone(),
        });

        for j in 0..DISTRACTORS_PER_TOPIC {
            let ordinal = (t * DISTRACTORS_PER_TOPIC + j) as u64;
            let text = format!("{query} {query} {}", doubled(&words.many(KEYWORDS_PER_DOC)));
            documents.push(Document::new(format!("doc{ordinal:03}"), ordinal, text));
        }

        for f in 0..FACETS_PER_TOPIC {
            let facet_id = format!("{topic_id}-F{}", f + 1);
            let facet_word = words.fresh();
            facets.push(Facet {
                id: facet_id.clone(),
                topic_id: topic_id.clone(),
                description: format!("{facet_word} {query}"),
            });

            let mut first_keywords = Vec::new();
            for r in 0..RELEVANT_PER_FACET {
                let ordinal = relevant_base + ((t * FACETS_PER_TOPIC + f) * RELEVANT_PER_FACET + r) as u64;
                let mut keywords = words.many(KEYWORDS_PER_DOC);
                keywords.sort();
                first_keywords.push(keywords[0].clone());
                let text = format!("{query} {facet_word} {}", doubled(&keywords));
                let doc_id = format!("doc{ordinal:03}");
                qrels.insert(&facet_id, &doc_id, if r == 0 { 2 } else { 1 })?;
                documents.push(Document::new(doc_id, ordinal, text));
            }
            let (kw_a, kw_b) = (&first_keywords[0], &first_keywords[1]);

            let image = |qid: &str, n: usize, aspect: String| ImageRecord {
                id: format!("{qid}-I{n}"),
                url: format!("https://images.example.org/{qid}/{n}.jpg"),
                aspect,
            };
            let unrelated = |words: &mut Words| words.many(2).join(" ");

            let q1 = format!("{facet_id}-Q1");
            questions.push(ClarifyingQuestion {
                id: q1.clone(),
                topic_id: topic_id.clone(),
                text: format!("are you interested in {facet_word} {query}?"),
                source: QuestionSource::Set1,
                multimodal: true,
                images: (1..=3).map(|n| image(&q1, n, unrelated(&mut words))).collect(),
            });
            answers.push(AnswerRecord {
                topic_id: topic_id.clone(),
                facet_id: facet_id.clone(),
                question_id: q1,
                text: format!("yes, {kw_a} and only {kw_a}"),
            });

            let q2 = format!("{facet_id}-Q2");
            questions.push(ClarifyingQuestion {
                id: q2.clone(),
                topic_id: topic_id.clone(),
                text: format!("would you like to see pictures of {facet_word}?"),
                source: QuestionSource::Set2,
                multimodal: true,
                images: vec![
                    image(&q2, 1, unrelated(&mut words)),
                    image(&q2, 2, format!("{facet_word} {kw_a} {kw_b}")),
                    image(&q2, 3, unrelated(&mut words)),
                ],
            });
            answers.push(AnswerRecord {
                topic_id: topic_id.clone(),
                facet_id: facet_id.clone(),
                question_id: q2,
                text: format!("something like {kw_a}"),
            });
        }
    }
    let dataset = Dataset::new(topics, facets, questions, answers);
    dataset.check()?;
    Ok(SyntheticFixture {
        dataset,
        documents,
        qrels,
    })
}

pub const DATASET_FILE: &str = "dataset.json";
pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const QRELS_FILE: &str = "qrels.txt";

impl SyntheticFixture {
    pub fn corpus_jsonl(&self) -> String {
        self.documents
            .iter()
            .map(|d| serde_json::to_string(d).expect("document serialization is infallible") + "\n")
            .collect()
    }

    /// Writes dataset, corpus and judgments into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, data) in [
            (DATASET_FILE, self.dataset.to_json_string()),
            (CORPUS_FILE, self.corpus_jsonl()),
            (QRELS_FILE, self.qrels.to_trec_string()),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, data).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}
