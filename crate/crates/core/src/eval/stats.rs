//! Descriptive statistics of the dataset and its answer collection.
//!
//! Standard deviations are population deviations. A yes/no answer is one
//! that tokenizes to exactly one token, `yes` or `no`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{AnswerRecord, Dataset, QuestionSource};
use crate::error::{Error, Result};
use crate::text::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return MeanStd { mean: 0.0, std: 0.0 };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        MeanStd { mean, std: var.sqrt() }
    }

    fn of_counts(counts: impl IntoIterator<Item = usize>) -> Self {
        let v: Vec<f64> = counts.into_iter().map(|c| c as f64).collect();
        Self::of(&v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerStats {
    pub answers: usize,
    pub terms: MeanStd,
    pub median_terms: f64,
    pub max_terms: usize,
    pub yes_no_percent: f64,
    pub vocabulary_size: usize,
}

pub fn is_yes_no(answer: &str) -> bool {
    matches!(tokenize(answer).as_slice(), [t] if t == "yes" || t == "no")
}

fn median(sorted: &[usize]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0
    }
}

pub fn answer_stats(answers: &[AnswerRecord]) -> Result<AnswerStats> {
    answer_text_stats(answers.iter().map(|a| a.text.as_str()))
}

/// [`answer_stats`] over bare answer strings.
pub fn answer_text_stats<'a>(answers: impl IntoIterator<Item = &'a str>) -> Result<AnswerStats> {
    let mut lengths = Vec::new();
    let mut yes_no = 0usize;
    let mut vocab = BTreeSet::new();
    for text in answers {
        let toks = tokenize(text);
        if matches!(toks.as_slice(), [t] if t == "yes" || t == "no") {
            yes_no += 1;
        }
        lengths.push(toks.len());
        vocab.extend(toks);
    }
    if lengths.is_empty() {
        return Err(Error::InvalidArgument(
            "answer statistics need at least one answer".into(),
        ));
    }
    let terms = MeanStd::of_counts(lengths.iter().copied());
    lengths.sort_unstable();
    Ok(AnswerStats {
        answers: lengths.len(),
        terms,
        median_terms: median(&lengths),
        max_terms: *lengths.last().expect("non-empty"),
        yes_no_percent: 100.0 * yes_no as f64 / lengths.len() as f64,
        vocabulary_size: vocab.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub topics: usize,
    pub facets: usize,
    pub questions: usize,
    pub set1_questions: usize,
    pub set2_questions: usize,
    pub questions_per_topic: MeanStd,
    pub terms_per_question: MeanStd,
    pub images: usize,
    pub images_per_question: MeanStd,
    pub answers: usize,
    pub answers_per_question: MeanStd,
}

pub fn dataset_stats(ds: &Dataset) -> DatasetStats {
    let mut per_topic: BTreeMap<&str, usize> = ds.topics.iter().map(|t| (t.id.as_str(), 0)).collect();
    let mut per_question: BTreeMap<&str, usize> = BTreeMap::new();
    for q in &ds.questions {
        *per_topic.entry(q.topic_id.as_str()).or_default() += 1;
        per_question.insert(q.id.as_str(), 0);
    }
    for a in &ds.answers {
        *per_question.entry(a.question_id.as_str()).or_default() += 1;
    }
    let set1 = ds.questions.iter().filter(|q| q.source == QuestionSource::Set1).count();
    DatasetStats {
        topics: ds.topics.len(),
        facets: ds.facets.len(),
        questions: ds.questions.len(),
        set1_questions: set1,
        set2_questions: ds.questions.len() - set1,
        questions_per_topic: MeanStd::of_counts(per_topic.values().copied()),
        terms_per_question: MeanStd::of_counts(ds.questions.iter().map(|q| tokenize(&q.text).len())),
        images: ds.questions.iter().map(|q| q.images.len()).sum(),
        images_per_question: MeanStd::of_counts(ds.questions.iter().map(|q| q.images.len())),
        answers: ds.answers.len(),
        answers_per_question: MeanStd::of_counts(per_question.values().copied()),
    }
}

pub fn format_dataset_stats(s: &DatasetStats) -> String {
    let ms = |m: MeanStd| format!("{:.2} ({:.2})", m.mean, m.std);
    [
        format!("# topics\t{}", s.topics),
        format!("# facets\t{}", s.facets),
        format!("# all questions\t{}", s.questions),
        format!("# set 1 questions\t{}", s.set1_questions),
        format!("# set 2 questions\t{}", s.set2_questions),
        format!("Avg. questions per topic (std.)\t{}", ms(s.questions_per_topic)),
        format!("Avg. # terms per question (std.)\t{}", ms(s.terms_per_question)),
        format!("# images\t{}", s.images),
        format!("Avg. # images per question (std.)\t{}", ms(s.images_per_question)),
        format!("# answers\t{}", s.answers),
        format!("Avg. # answers per question (std.)\t{}", ms(s.answers_per_question)),
    ]
    .join("\n")
        + "\n"
}

pub fn format_answer_stats(s: &AnswerStats) -> String {
    format!(
        "Avg. terms (std.)\t{:.2} ({:.2})\nMid. terms\t{}\nMax. terms\t{}\nYes/no answers (%)\t{:.2}\nVocab. size\t{}\n\
         # yes/no answers: exactly one token, either \"yes\" or \"no\"\n",
        s.terms.mean, s.terms.std, s.median_terms, s.max_terms, s.yes_no_percent, s.vocabulary_size
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ClarifyingQuestion, Facet, ImageRecord, Topic};
    use approx::assert_abs_diff_eq;

    fn tiny() -> Dataset {
        Dataset::new(
            vec![Topic {
                id: "t1".into(),
                query: "q".into(),
            }],
            vec![Facet {
                id: "f1".into(),
                topic_id: "t1".into(),
                description: "d".into(),
            }],
            vec![ClarifyingQuestion {
                id: "q1".into(),
                topic_id: "t1".into(),
                text: "do you want this".into(),
                source: QuestionSource::Set1,
                multimodal: false,
                images: vec![],
            }],
            vec![AnswerRecord {
                topic_id: "t1".into(),
                facet_id: "f1".into(),
                question_id: "q1".into(),
                text: "yes".into(),
            }],
        )
    }

    #[test]
    fn yes_no_and_vocab() {
        let s = answer_text_stats(["yes", "no thanks"]).unwrap();
        assert_eq!(s.yes_no_percent, 50.0);
        assert_eq!(s.vocabulary_size, 3);
        assert_eq!(s.terms.mean, 1.5);
        assert_eq!(s.terms.std, 0.5);
        assert_eq!(s.median_terms, 1.5);
        assert_eq!(s.max_terms, 2);
        assert!(is_yes_no(" No! "));
        assert!(!is_yes_no("yes yes"));
    }

    #[test]
    fn median_and_max() {
        let s = answer_text_stats(["a", "a b c", "a b", "a b c d e f g"]).unwrap();
        assert_eq!(s.median_terms, 2.5);
        assert_eq!(s.max_terms, 7);
        assert!(s.max_terms as f64 >= s.median_terms);
        assert!(answer_text_stats([]).is_err());
    }

    #[test]
    fn one_of_everything() {
        let s = dataset_stats(&tiny());
        assert_eq!(
            (s.topics, s.facets, s.questions, s.set1_questions, s.set2_questions),
            (1, 1, 1, 1, 0)
        );
        assert_eq!((s.images, s.answers), (0, 1));
        assert_eq!(s.images_per_question, MeanStd { mean: 0.0, std: 0.0 });
        assert_eq!(s.questions_per_topic.mean, 1.0);
        assert_eq!(s.terms_per_question.mean, 4.0);
    }

    #[test]
    fn adding_a_question_changes_only_question_fields() {
        let before = dataset_stats(&tiny());
        let mut ds = tiny();
        ds.questions.push(ClarifyingQuestion {
            id: "q2".into(),
            topic_id: "t1".into(),
            text: "see these".into(),
            source: QuestionSource::Set2,
            multimodal: true,
            images: vec![ImageRecord {
                id: "i1".into(),
                url: "u".into(),
                aspect: "a".into(),
            }],
        });
        let after = dataset_stats(&ds);
        assert_eq!(
            (after.topics, after.facets, after.answers),
            (before.topics, before.facets, before.answers)
        );
        assert_eq!(after.questions, before.questions + 1);
        assert_eq!(after.set2_questions, 1);
        assert_eq!(after.images, 1);
        assert_eq!(after.questions_per_topic.mean, 2.0);
        assert_abs_diff_eq!(after.answers_per_question.mean, 0.5);
        assert_abs_diff_eq!(after.terms_per_question.mean, 3.0);
    }
}
