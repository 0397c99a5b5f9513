//! Graded-relevance ranking metrics.
//!
//! Documents with grade > 0 are relevant. nDCG uses the `2^g - 1` gain by
//! default and a `log2(rank + 1)` discount; ERR uses the stopping
//! probability `(2^g - 1) / 2^g_max`. Unjudged documents have grade 0.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Metric names in report column order.
pub const METRIC_NAMES: [&str; 10] = [
    "mrr", "p@1", "p@3", "p@5", "ndcg@1", "ndcg@3", "ndcg@5", "err@1", "err@3", "err@5",
];

/// Column headers matching [`METRIC_NAMES`].
pub const METRIC_HEADERS: [&str; 10] = [
    "MRR", "P@1", "P@3", "P@5", "nDCG@1", "nDCG@3", "nDCG@5", "ERR@1", "ERR@3", "ERR@5",
];

const CUTOFFS: [usize; 3] = [1, 3, 5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gain {
    /// `2^g - 1`
    #[default]
    Exponential,
    /// `g`
    Linear,
}

impl Gain {
    fn of(self, grade: u32) -> f64 {
        match self {
            Gain::Exponential => 2f64.powi(grade as i32) - 1.0,
            Gain::Linear => grade as f64,
        }
    }
}

pub fn precision_at(grades: &[u32], k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    grades.iter().take(k).filter(|&&g| g > 0).count() as f64 / k as f64
}

pub fn reciprocal_rank(grades: &[u32]) -> f64 {
    grades.iter().position(|&g| g > 0).map_or(0.0, |r| 1.0 / (r + 1) as f64)
}

pub fn dcg_at(grades: &[u32], k: usize, gain: Gain) -> f64 {
    grades
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, &g)| gain.of(g) / ((i + 2) as f64).log2())
        .sum()
}

/// `ideal` holds every judged grade for the query, in any order.
pub fn ndcg_at(grades: &[u32], ideal: &[u32], k: usize, gain: Gain) -> f64 {
    let mut best = ideal.to_vec();
    best.sort_unstable_by(|a, b| b.cmp(a));
    let idcg = dcg_at(&best, k, gain);
    if idcg == 0.0 {
        0.0
    } else {
        dcg_at(grades, k, gain) / idcg
    }
}

pub fn err_at(grades: &[u32], k: usize, g_max: u32) -> f64 {
    let scale = 2f64.powi(g_max as i32);
    let mut not_stopped = 1.0;
    let mut err = 0.0;
    for (i, &g) in grades.iter().take(k).enumerate() {
        let r = (2f64.powi(g as i32) - 1.0) / scale;
        err += not_stopped * r / (i + 1) as f64;
        not_stopped *= 1.0 - r;
    }
    err
}

/// The ten report metrics for one ranking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    values: [f64; 10],
}

impl MetricsRecord {
    pub fn from_values(values: [f64; 10]) -> Self {
        MetricsRecord { values }
    }

    pub fn values(&self) -> &[f64; 10] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        METRIC_NAMES.iter().position(|n| *n == name).map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        METRIC_NAMES.iter().copied().zip(self.values.iter().copied())
    }
}

impl Serialize for MetricsRecord {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(METRIC_NAMES.len()))?;
        for (name, value) in self.iter() {
            map.serialize_entry(name, &value)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for MetricsRecord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct RecordVisitor;

        impl<'de> Visitor<'de> for RecordVisitor {
            type Value = MetricsRecord;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "a map with keys {METRIC_NAMES:?}")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> std::result::Result<MetricsRecord, A::Error> {
                let mut values = [f64::NAN; 10];
                while let Some((key, value)) = access.next_entry::<String, f64>()? {
                    let i = METRIC_NAMES
                        .iter()
                        .position(|n| *n == key)
                        .ok_or_else(|| de::Error::unknown_field(&key, &METRIC_NAMES))?;
                    values[i] = value;
                }
                if let Some(i) = values.iter().position(|v| v.is_nan()) {
                    return Err(de::Error::missing_field(METRIC_NAMES[i]));
                }
                Ok(MetricsRecord { values })
            }
        }

        deserializer.deserialize_map(RecordVisitor)
    }
}

/// Scores one ranking against the judged grades of its query.
pub fn evaluate_ranking<S: AsRef<str>>(
    ranking: &[S],
    grades: &BTreeMap<String, u32>,
    g_max: u32,
    gain: Gain,
) -> Result<MetricsRecord> {
    let mut seen = HashSet::with_capacity(ranking.len());
    for doc in ranking {
        if !seen.insert(doc.as_ref()) {
            return Err(Error::Duplicate {
                kind: "ranked document",
                id: doc.as_ref().to_string(),
            });
        }
    }
    if let Some((doc, &g)) = grades.iter().find(|(_, &g)| g > g_max) {
        return Err(Error::InvalidArgument(format!(
            "grade {g} of '{doc}' exceeds g_max {g_max}"
        )));
    }
    let ranked: Vec<u32> = ranking
        .iter()
        .map(|d| grades.get(d.as_ref()).copied().unwrap_or(0))
        .collect();
    let ideal: Vec<u32> = grades.values().copied().collect();
    let mut values = [0.0; 10];
    values[0] = reciprocal_rank(&ranked);
    for (j, &k) in CUTOFFS.iter().enumerate() {
        values[1 + j] = precision_at(&ranked, k);
        values[4 + j] = ndcg_at(&ranked, &ideal, k, gain);
        values[7 + j] = err_at(&ranked, k, g_max);
    }
    Ok(MetricsRecord { values })
}

/// Per-metric arithmetic mean.
pub fn macro_average(records: &[MetricsRecord]) -> Result<MetricsRecord> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("cannot average zero metric records".into()));
    }
    let mut values = [0.0; 10];
    for r in records {
        for (acc, v) in values.iter_mut().zip(r.values) {
            *acc += v;
        }
    }
    values.iter_mut().for_each(|v| *v /= records.len() as f64);
    Ok(MetricsRecord { values })
}
