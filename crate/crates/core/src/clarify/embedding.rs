//! Unit-norm vector store and cosine-based image selection.
//!
//! # File format
//!
//! ```text
//! MELON-EMB v1 <dim>
//! <id>\t<f1> <f2> ... <f_dim>
//! ```
//!
//! Rows are normalized on load; zero vectors, dimension mismatches and
//! repeated ids are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

pub const EMBEDDING_HEADER: &str = "MELON-EMB v1";

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    seed.to_le_bytes()
        .iter()
        .chain(bytes)
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

fn l2_normalize(v: &mut [f64]) -> Option<()> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Some(())
}

/// Feature-hashed character trigram embedding.
///
/// The text is lowercased and whitespace runs collapse to one space. Every
/// character 3-gram is hashed with FNV-1a over `seed` (little-endian) and
/// the gram's UTF-8 bytes; the hash modulo `dim` picks the bucket and its top
/// bit the sign. The result is L2-normalized.
pub fn hash_embed(text: &str, dim: usize, seed: u64) -> Result<Vec<f64>> {
    if dim < 8 {
        return Err(Error::InvalidArgument(format!("embedding dim must be >= 8, got {dim}")));
    }
    let normalized = text.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ");
    let chars: Vec<char> = normalized.chars().collect();
    if chars.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "text {text:?} has no character 3-grams"
        )));
    }
    let mut v = vec![0.0; dim];
    let mut gram = String::with_capacity(12);
    for w in chars.windows(3) {
        gram.clear();
        gram.extend(w);
        let h = fnv1a(seed, gram.as_bytes());
        let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
        v[(h % dim as u64) as usize] += sign;
    }
    l2_normalize(&mut v).ok_or_else(|| Error::InvalidArgument(format!("text {text:?} hashes to the zero vector")))?;
    Ok(v)
}

/// Cosine similarity of two equal-length vectors; 0 when either is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("embedding dim must be positive".into()));
        }
        Ok(EmbeddingStore {
            dim,
            vectors: BTreeMap::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.vectors.get(id).map(Vec::as_slice)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.vectors.contains_key(id)
    }

    /// Stores `vector` after normalizing it to unit length.
    pub fn insert(&mut self, id: impl Into<String>, mut vector: Vec<f64>) -> Result<()> {
        let id = id.into();
        if vector.len() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "vector '{id}' has {} components, expected {}",
                vector.len(),
                self.dim
            )));
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "vector '{id}' has non-finite components"
            )));
        }
        if l2_normalize(&mut vector).is_none() {
            return Err(Error::InvalidArgument(format!("vector '{id}' is zero")));
        }
        if self.vectors.contains_key(&id) {
            return Err(Error::Duplicate { kind: "embedding", id });
        }
        self.vectors.insert(id, vector);
        Ok(())
    }

    pub fn similarity(&self, a: &str, b: &str) -> Result<f64> {
        let va = self.get(a).ok_or_else(|| Error::UnknownId(a.to_string()))?;
        let vb = self.get(b).ok_or_else(|| Error::UnknownId(b.to_string()))?;
        Ok(cosine(va, vb))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{EMBEDDING_HEADER} {}\n", self.dim);
        for (id, v) in &self.vectors {
            out.push_str(id);
            out.push('\t');
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                // `{:?}` prints the shortest representation that round-trips.
                let _ = write!(out, "{x:?}");
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

pub fn parse_embeddings(reader: impl BufRead, origin: &str) -> Result<EmbeddingStore> {
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line.map_err(|e| Error::parse(format!("{origin}:1"), e))?,
        None => return Err(Error::parse(format!("{origin}:1"), "empty embedding file")),
    };
    let dim = header
        .strip_prefix(EMBEDDING_HEADER)
        .and_then(|rest| rest.trim().parse::<usize>().ok())
        .ok_or_else(|| Error::Header {
            expected: format!("{EMBEDDING_HEADER} <dim>"),
            found: header.chars().take(40).collect(),
        })?;
    let mut store = EmbeddingStore::new(dim)?;
    for (n, line) in lines {
        let location = format!("{origin}:{}", n + 1);
        let line = line.map_err(|e| Error::parse(&location, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let id = fields.next().expect("non-blank line has a first field");
        let vector = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::parse(&location, format!("bad float '{f}'")))
            })
            .collect::<Result<Vec<f64>>>()?;
        store.insert(id, vector).map_err(|e| match e {
            Error::InvalidArgument(msg) => Error::parse(&location, msg),
            other => other,
        })?;
    }
    Ok(store)
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingStore> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(BufReader::new(file), &path.display().to_string())
}

/// Candidates ordered by cosine to the query (ties by ascending id), first `k`.
pub fn select_images(
    store: &EmbeddingStore,
    question_id: &str,
    candidate_image_ids: &[String],
    k: usize,
) -> Result<Vec<String>> {
    if k == 0 {
        return Err(Error::InvalidArgument("image count k must be >= 1".into()));
    }
    let q = store
        .get(question_id)
        .ok_or_else(|| Error::UnknownId(question_id.to_string()))?;
    let mut scored = Vec::with_capacity(candidate_image_ids.len());
    for id in candidate_image_ids {
        let v = store.get(id).ok_or_else(|| Error::UnknownId(id.clone()))?;
        // Stored vectors are unit length, so the dot product is the cosine.
        let sim: f64 = q.iter().zip(v).map(|(a, b)| a * b).sum();
        scored.push((sim, id.as_str()));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    scored.dedup_by(|a, b| a.1 == b.1);
    Ok(scored.into_iter().take(k).map(|(_, id)| id.to_string()).collect())
}
