//! VEQ/TEQ labels from the nDCG gain of image-augmented retrieval.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassLabel {
    /// Attaching images helps retrieval.
    #[serde(rename = "VEQ")]
    Veq,
    /// Text alone is at least as good.
    #[serde(rename = "TEQ")]
    Teq,
}

impl ClassLabel {
    pub fn swapped(self) -> Self {
        match self {
            ClassLabel::Veq => ClassLabel::Teq,
            ClassLabel::Teq => ClassLabel::Veq,
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            ClassLabel::Veq => 0,
            ClassLabel::Teq => 1,
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassLabel::Veq => "VEQ",
            ClassLabel::Teq => "TEQ",
        })
    }
}

/// Only a strictly positive gain counts as visually enhanced.
pub fn label_for_delta(delta: f64) -> ClassLabel {
    if delta > 0.0 {
        ClassLabel::Veq
    } else {
        ClassLabel::Teq
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakLabel {
    pub delta: f64,
    pub label: ClassLabel,
}

fn mean3(v: [f64; 3]) -> f64 {
    (v[0] + v[1] + v[2]) / 3.0
}

/// `tor` and `mur` are nDCG@1, @3, @5 of the text-only and multimodal runs.
pub fn weak_label(tor: [f64; 3], mur: [f64; 3]) -> WeakLabel {
    let delta = mean3(mur) - mean3(tor);
    WeakLabel {
        delta,
        label: label_for_delta(delta),
    }
}

/// A question's per-facet gains and the label of their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakLabelRecord {
    pub question_id: String,
    pub facet_deltas: Vec<f64>,
    pub delta: f64,
    pub label: ClassLabel,
}

/// Averages per-(question, facet) gains into one record per question.
pub fn aggregate_weak_labels<'a>(samples: impl IntoIterator<Item = (&'a str, f64)>) -> Vec<WeakLabelRecord> {
    let mut by_question: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (q, delta) in samples {
        by_question.entry(q).or_default().push(delta);
    }
    by_question
        .into_iter()
        .map(|(q, deltas)| {
            let delta = deltas.iter().sum::<f64>() / deltas.len() as f64;
            WeakLabelRecord {
                question_id: q.to_string(),
                facet_deltas: deltas,
                delta,
                label: label_for_delta(delta),
            }
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct WeakLabelLine {
    question_id: String,
    delta: f64,
    label: ClassLabel,
}

pub fn weak_labels_to_jsonl(records: &[WeakLabelRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let line = WeakLabelLine {
            question_id: r.question_id.clone(),
            delta: r.delta,
            label: r.label,
        };
        out.push_str(&serde_json::to_string(&line).expect("weak label serialization is infallible"));
        out.push('\n');
    }
    out
}

/// question id → label
pub fn parse_weak_labels(reader: impl BufRead, origin: &str) -> Result<BTreeMap<String, (f64, ClassLabel)>> {
    let mut out = BTreeMap::new();
    for (n, line) in reader.lines().enumerate() {
        let location = format!("{origin}:{}", n + 1);
        let line = line.map_err(|e| Error::parse(&location, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: WeakLabelLine = serde_json::from_str(&line).map_err(|e| Error::parse(&location, e))?;
        if out.insert(rec.question_id.clone(), (rec.delta, rec.label)).is_some() {
            return Err(Error::Duplicate {
                kind: "weak label",
                id: rec.question_id,
            });
        }
    }
    Ok(out)
}

pub fn load_weak_labels(path: impl AsRef<Path>) -> Result<BTreeMap<String, (f64, ClassLabel)>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_weak_labels(BufReader::new(file), &path.display().to_string())
}
