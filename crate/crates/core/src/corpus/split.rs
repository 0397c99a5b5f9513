//! Facet-level train/validation/test partition.
//!
//! Facet ids are sorted lexicographically, shuffled with a ChaCha8 generator
//! seeded through `SeedableRng::seed_from_u64(seed)` (rand 0.8 Fisher-Yates
//! `SliceRandom::shuffle`), then cut into consecutive blocks:
//! `train = floor(N * r_train)`, `validation = floor(N * r_val)`, and the test
//! block takes the remainder.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.8,
            validation: 0.1,
            test: 0.1,
        }
    }
}

impl SplitRatios {
    fn validate(&self) -> Result<()> {
        let all = [self.train, self.validation, self.test];
        if all.iter().any(|r| !r.is_finite() || *r <= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "split ratios must be positive: {all:?}"
            )));
        }
        if (all.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("split ratios must sum to 1: {all:?}")));
        }
        Ok(())
    }
}

/// Split membership for every facet.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SplitAssignment(pub BTreeMap<String, Split>);

impl SplitAssignment {
    pub fn get(&self, facet_id: &str) -> Option<Split> {
        self.0.get(facet_id).copied()
    }

    pub fn count(&self, split: Split) -> usize {
        self.0.values().filter(|&&s| s == split).count()
    }

    pub fn facets_in(&self, split: Split) -> impl Iterator<Item = &str> {
        self.0.iter().filter(move |(_, &s)| s == split).map(|(f, _)| f.as_str())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self).expect("split serialization is infallible");
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&json)
            .map_err(|e| Error::parse(format!("{}:{}:{}", path.display(), e.line(), e.column()), e))
    }
}

/// Block sizes for `n` facets: (train, validation, test).
pub fn split_sizes(n: usize, ratios: &SplitRatios) -> Result<(usize, usize, usize)> {
    ratios.validate()?;
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "cannot split {n} facets into three non-empty sets"
        )));
    }
    // The epsilon absorbs representation error, e.g. 0.1 * 1070.
    let floor = |r: f64| ((n as f64) * r + 1e-9).floor() as usize;
    let train = floor(ratios.train).min(n);
    let validation = floor(ratios.validation).min(n - train);
    Ok((train, validation, n - train - validation))
}

pub fn split_facet_ids<I, S>(facet_ids: I, ratios: &SplitRatios, seed: u64) -> Result<SplitAssignment>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let mut ids: Vec<String> = facet_ids.into_iter().map(Into::into).collect();
    ids.sort();
    ids.dedup();
    let (train, validation, _) = split_sizes(ids.len(), ratios)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    let assignment = ids
        .into_iter()
        .enumerate()
        .map(|(i, id)| {
            let split = if i < train {
                Split::Train
            } else if i < train + validation {
                Split::Validation
            } else {
                Split::Test
            };
            (id, split)
        })
        .collect();
    Ok(SplitAssignment(assignment))
}

pub fn split_facets(dataset: &Dataset, ratios: &SplitRatios, seed: u64) -> Result<SplitAssignment> {
    split_facet_ids(dataset.facets.iter().map(|f| f.id.clone()), ratios, seed)
}
