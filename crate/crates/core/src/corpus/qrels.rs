use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

/// Facet-level graded relevance judgments: facet id → doc id → grade.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    judgments: BTreeMap<String, BTreeMap<String, u32>>,
}

impl Qrels {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one judgment; a repeated (facet, doc) pair is an error.
    pub fn insert(&mut self, facet_id: &str, doc_id: &str, grade: u32) -> Result<()> {
        let grades = self.judgments.entry(facet_id.to_string()).or_default();
        if grades.insert(doc_id.to_string(), grade).is_some() {
            return Err(Error::Duplicate {
                kind: "qrels pair",
                id: format!("{facet_id} {doc_id}"),
            });
        }
        Ok(())
    }

    pub fn grades(&self, facet_id: &str) -> Option<&BTreeMap<String, u32>> {
        self.judgments.get(facet_id)
    }

    pub fn grade(&self, facet_id: &str, doc_id: &str) -> u32 {
        self.grades(facet_id).and_then(|g| g.get(doc_id)).copied().unwrap_or(0)
    }

    /// A facet counts as judged when it has at least one positive grade.
    pub fn is_judged(&self, facet_id: &str) -> bool {
        self.grades(facet_id)
            .is_some_and(|g| g.values().any(|&grade| grade > 0))
    }

    pub fn max_grade(&self) -> u32 {
        self.judgments
            .values()
            .flat_map(|g| g.values())
            .copied()
            .max()
            .unwrap_or(0)
    }

    pub fn facets(&self) -> impl Iterator<Item = (&String, &BTreeMap<String, u32>)> {
        self.judgments.iter()
    }

    pub fn len(&self) -> usize {
        self.judgments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.judgments.is_empty()
    }

    /// TREC 4-column text, sorted by facet then doc id.
    pub fn to_trec_string(&self) -> String {
        let mut out = String::new();
        for (facet, grades) in &self.judgments {
            for (doc, grade) in grades {
                out.push_str(&format!("{facet} 0 {doc} {grade}\n"));
            }
        }
        out
    }
}

/// Parses `facet_id 0 doc_id grade` lines; column 2 is ignored.
pub fn parse_qrels(reader: impl BufRead, origin: &str) -> Result<Qrels> {
    let mut qrels = Qrels::new();
    for (n, line) in reader.lines().enumerate() {
        let location = format!("{origin}:{}", n + 1);
        let line = line.map_err(|e| Error::parse(&location, e))?;
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.is_empty() {
            continue;
        }
        if cols.len() != 4 {
            return Err(Error::parse(
                location,
                format!("expected 4 columns, found {}", cols.len()),
            ));
        }
        let grade: i64 = cols[3]
            .parse()
            .map_err(|_| Error::parse(&location, format!("grade '{}' is not an integer", cols[3])))?;
        if grade < 0 {
            return Err(Error::parse(location, format!("negative grade {grade}")));
        }
        let grade = u32::try_from(grade).map_err(|_| Error::parse(&location, format!("grade {grade} out of range")))?;
        qrels.insert(cols[0], cols[2], grade)?;
    }
    Ok(qrels)
}

pub fn load_qrels(path: impl AsRef<Path>) -> Result<Qrels> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_qrels(BufReader::new(file), &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_line() {
        let q = parse_qrels("F1 0 D7 2\n".as_bytes(), "q").unwrap();
        assert_eq!(q.grade("F1", "D7"), 2);
        assert_eq!(q.len(), 1);
        assert!(q.is_judged("F1"));
        assert_eq!(q.max_grade(), 2);
    }

    #[test]
    fn duplicate_pair_is_error() {
        let err = parse_qrels("F1 0 D7 2\nF1 0 D7 1\n".as_bytes(), "q").unwrap_err();
        assert!(matches!(err, Error::Duplicate { .. }));
    }

    #[test]
    fn empty_file_is_valid() {
        assert!(parse_qrels("".as_bytes(), "q").unwrap().is_empty());
    }

    #[test]
    fn malformed_and_negative() {
        assert!(matches!(
            parse_qrels("F1 0 D7".as_bytes(), "q"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_qrels("F1 0 D7 x".as_bytes(), "q"),
            Err(Error::Parse { .. })
        ));
        let err = parse_qrels("F1 0 D7 -1".as_bytes(), "q").unwrap_err().to_string();
        assert!(err.contains("negative"), "{err}");
    }

    #[test]
    fn zero_only_facet_is_not_judged() {
        let q = parse_qrels("F1 0 D1 0\nF2 0 D1 1".as_bytes(), "q").unwrap();
        assert!(!q.is_judged("F1"));
        assert!(q.is_judged("F2"));
        assert!(!q.is_judged("F3"));
    }

    #[test]
    fn trec_text_round_trip() {
        let q = parse_qrels("F2 0 D1 1\nF1 0 D7 2\nF1 0 D3 0\n".as_bytes(), "q").unwrap();
        assert_eq!(parse_qrels(q.to_trec_string().as_bytes(), "again").unwrap(), q);
    }
}
