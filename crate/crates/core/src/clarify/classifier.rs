//! Multinomial naive Bayes over the unigrams of (topic query, question).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::clarify::ClassLabel;
use crate::error::{Error, Result};
use crate::text::tokenize;

const CLASSES: [ClassLabel; 2] = [ClassLabel::Veq, ClassLabel::Teq];

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSample {
    pub query: String,
    pub question: String,
    pub label: ClassLabel,
}

/// Per-class token likelihoods with add-alpha smoothing.
///
/// Likelihoods are normalized over the training vocabulary plus one unknown
/// slot. Tokens outside the vocabulary carry no evidence and are skipped at
/// prediction time, so an all-unknown input falls back to the priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceClassifier {
    alpha: f64,
    /// Indexed VEQ, TEQ.
    class_docs: [u64; 2],
    class_tokens: [u64; 2],
    token_counts: BTreeMap<String, [u64; 2]>,
}

fn features(query: &str, question: &str) -> Vec<String> {
    let mut toks = tokenize(query);
    toks.extend(tokenize(question));
    toks
}

pub fn train_classifier(samples: &[ClassifierSample], alpha: f64) -> Result<ReferenceClassifier> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be > 0, got {alpha}")));
    }
    let mut class_docs = [0u64; 2];
    let mut class_tokens = [0u64; 2];
    let mut token_counts: BTreeMap<String, [u64; 2]> = BTreeMap::new();
    for s in samples {
        let c = s.label.index();
        class_docs[c] += 1;
        for tok in features(&s.query, &s.question) {
            token_counts.entry(tok).or_default()[c] += 1;
            class_tokens[c] += 1;
        }
    }
    if class_docs.contains(&0) {
        return Err(Error::InvalidArgument(
            "classifier training needs samples of both VEQ and TEQ".into(),
        ));
    }
    Ok(ReferenceClassifier {
        alpha,
        class_docs,
        class_tokens,
        token_counts,
    })
}

impl ReferenceClassifier {
    pub fn vocabulary_size(&self) -> usize {
        self.token_counts.len()
    }

    pub fn log_prior(&self, label: ClassLabel) -> f64 {
        let n: u64 = self.class_docs.iter().sum();
        (self.class_docs[label.index()] as f64 / n as f64).ln()
    }

    /// Smoothed log P(token | label); `None` marks the unknown slot.
    pub fn log_likelihood(&self, token: Option<&str>, label: ClassLabel) -> f64 {
        let c = label.index();
        let count = token
            .and_then(|t| self.token_counts.get(t))
            .map_or(0, |counts| counts[c]);
        let denom = self.class_tokens[c] as f64 + self.alpha * (self.vocabulary_size() + 1) as f64;
        ((count as f64 + self.alpha) / denom).ln()
    }

    /// Unnormalized log posterior per class, indexed VEQ, TEQ.
    pub fn log_joint(&self, query: &str, question: &str) -> [f64; 2] {
        let toks: Vec<String> = features(query, question)
            .into_iter()
            .filter(|t| self.token_counts.contains_key(t))
            .collect();
        CLASSES
            .map(|label| self.log_prior(label) + toks.iter().map(|t| self.log_likelihood(Some(t), label)).sum::<f64>())
    }

    /// Most probable label and its posterior; exact ties go to TEQ.
    pub fn classify(&self, query: &str, question: &str) -> (ClassLabel, f64) {
        let [veq, teq] = self.log_joint(query, question);
        let max = veq.max(teq);
        let z = (veq - max).exp() + (teq - max).exp();
        if veq > teq {
            (ClassLabel::Veq, (veq - max).exp() / z)
        } else {
            (ClassLabel::Teq, (teq - max).exp() / z)
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self).expect("classifier serialization is infallible");
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&json)
            .map_err(|e| Error::parse(format!("{}:{}:{}", path.display(), e.line(), e.column()), e))
    }
}

pub fn classify_question(classifier: &ReferenceClassifier, query: &str, question: &str) -> (ClassLabel, f64) {
    classifier.classify(query, question)
}
