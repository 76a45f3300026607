use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{EvidenceSource, ObservationKind, SourceError};
use crate::text;

const YEAR_RANGE: std::ops::RangeInclusive<i32> = 1900..=2100;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("line {line}: duplicate document id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: year {year} outside 1900..=2100")]
    Year { line: usize, year: i32 },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusDocument {
    pub id: String,
    pub year: i32,
    pub text: String,
    /// Proxy for user interest (citations, query frequency).
    #[serde(default)]
    pub interest: u64,
}

/// A document hit from ranked retrieval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedHit {
    pub id: String,
    pub text: String,
}

/// Sources able to return ranked result lists, as needed by the evolver.
pub trait RankedSource: Send + Sync {
    fn engine_id(&self) -> &str;

    /// Top `limit` results for a bag of query terms.
    fn search(&self, terms: &[String], limit: usize) -> Result<Vec<RankedHit>, SourceError>;
}

/// Deterministic in-memory document collection.
#[derive(Debug, Clone)]
pub struct Corpus {
    engine_id: String,
    docs: Vec<CorpusDocument>,
    folded: Vec<String>,
    fingerprint: String,
}

impl Corpus {
    /// Parses JSON Lines; blank lines are skipped.
    pub fn from_jsonl(content: &str) -> Result<Self, CorpusError> {
        let mut docs = Vec::new();
        let mut ids = HashSet::new();
        for (i, line) in content.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let doc: CorpusDocument =
                serde_json::from_str(line).map_err(|e| CorpusError::Line {
                    line: line_no,
                    message: e.to_string(),
                })?;
            if !YEAR_RANGE.contains(&doc.year) {
                return Err(CorpusError::Year {
                    line: line_no,
                    year: doc.year,
                });
            }
            if !ids.insert(doc.id.clone()) {
                return Err(CorpusError::DuplicateId {
                    line: line_no,
                    id: doc.id,
                });
            }
            docs.push(doc);
        }
        Ok(Corpus::from_documents_unchecked("offline", docs))
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let content = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let corpus = Corpus::from_jsonl(&content)?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "offline".into());
        Ok(corpus.with_engine_id(stem))
    }

    fn from_documents_unchecked(engine_id: &str, docs: Vec<CorpusDocument>) -> Self {
        let folded = docs.iter().map(|d| text::fold(&d.text)).collect();
        let mut hasher = Sha256::new();
        for doc in &docs {
            hasher.update(serde_json::to_vec(doc).expect("document serializes"));
            hasher.update(b"\n");
        }
        Corpus {
            engine_id: engine_id.to_string(),
            docs,
            folded,
            fingerprint: hex::encode(hasher.finalize()),
        }
    }

    pub fn with_engine_id(mut self, engine_id: impl Into<String>) -> Self {
        self.engine_id = engine_id.into();
        self
    }

    pub fn engine_id(&self) -> &str {
        &self.engine_id
    }

    pub fn documents(&self) -> &[CorpusDocument] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Distinct document years, ascending.
    pub fn years(&self) -> Vec<i32> {
        let mut years: Vec<i32> = self.docs.iter().map(|d| d.year).collect();
        years.sort_unstable();
        years.dedup();
        years
    }

    fn matching<'a>(
        &'a self,
        phrases: &'a [String],
        year: Option<i32>,
    ) -> impl Iterator<Item = &'a CorpusDocument> + 'a {
        self.docs
            .iter()
            .zip(&self.folded)
            .filter(move |(doc, _)| year.is_none_or(|y| doc.year == y))
            .filter(move |(_, folded)| phrases.iter().all(|p| folded.contains(p.as_str())))
            .map(|(doc, _)| doc)
    }
}

impl EvidenceSource for Corpus {
    fn engine_id(&self) -> &str {
        &self.engine_id
    }

    fn fingerprint(&self) -> String {
        self.fingerprint.clone()
    }

    fn count(
        &self,
        phrases: &[&str],
        kind: ObservationKind,
        year: Option<i32>,
    ) -> Result<u64, SourceError> {
        let folded: Vec<String> = phrases.iter().map(|p| text::fold(p)).collect();
        let docs = self.matching(&folded, year);
        Ok(match kind {
            ObservationKind::Hits => docs.count() as u64,
            ObservationKind::Interest => docs.map(|d| d.interest).sum(),
        })
    }
}

impl RankedSource for Corpus {
    fn engine_id(&self) -> &str {
        &self.engine_id
    }

    /// Coordination-level ranking: documents matching at least one term,
    /// ordered by the number of distinct terms matched, then total term
    /// occurrences, then id.
    fn search(&self, terms: &[String], limit: usize) -> Result<Vec<RankedHit>, SourceError> {
        let folded: Vec<String> = terms.iter().map(|t| text::fold(t)).collect();
        let mut scored: Vec<(usize, usize, &CorpusDocument)> = self
            .docs
            .iter()
            .zip(&self.folded)
            .filter_map(|(doc, body)| {
                let counts: Vec<usize> =
                    folded.iter().map(|t| text::occurrences(body, t)).collect();
                let distinct = counts.iter().filter(|&&c| c > 0).count();
                (distinct > 0).then(|| (distinct, counts.iter().sum(), doc))
            })
            .collect();
        scored.sort_by(|a, b| {
            b.0.cmp(&a.0)
                .then_with(|| b.1.cmp(&a.1))
                .then_with(|| a.2.id.cmp(&b.2.id))
        });
        Ok(scored
            .into_iter()
            .take(limit)
            .map(|(_, _, doc)| RankedHit {
                id: doc.id.clone(),
                text: doc.text.clone(),
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_bad_years() {
        let dup = "{\"id\": \"a\", \"year\": 2000, \"text\": \"x\"}\n{\"id\": \"a\", \"year\": 2001, \"text\": \"y\"}";
        assert!(matches!(
            Corpus::from_jsonl(dup),
            Err(CorpusError::DuplicateId { line: 2, .. })
        ));
        let old = r#"{"id": "a", "year": 1800, "text": "x"}"#;
        assert!(matches!(Corpus::from_jsonl(old), Err(CorpusError::Year { year: 1800, .. })));
        assert!(matches!(
            Corpus::from_jsonl("{\"id\": 1}"),
            Err(CorpusError::Line { line: 1, .. })
        ));
    }

    #[test]
    fn phrase_matching_is_whitespace_normalized() {
        let c = Corpus::from_jsonl(r#"{"id": "a", "year": 2000, "text": "Optic\n  Nerve damage"}"#)
            .unwrap();
        assert_eq!(c.count(&["optic nerve"], ObservationKind::Hits, None), Ok(1));
        assert_eq!(c.count(&["nerve optic"], ObservationKind::Hits, None), Ok(0));
    }

    #[test]
    fn ranked_search_orders_by_coordination() {
        let c = Corpus::from_jsonl(
            r#"{"id": "b", "year": 2000, "text": "alpha"}
{"id": "a", "year": 2000, "text": "alpha alpha"}
{"id": "c", "year": 2000, "text": "alpha beta"}
{"id": "d", "year": 2000, "text": "gamma"}"#,
        )
        .unwrap();
        let hits = c.search(&["alpha".into(), "beta".into()], 10).unwrap();
        let ids: Vec<_> = hits.iter().map(|h| h.id.as_str()).collect();
        assert_eq!(ids, ["c", "a", "b"]);
        assert_eq!(c.search(&["alpha".into()], 1).unwrap().len(), 1);
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = Corpus::from_jsonl(r#"{"id": "a", "year": 2000, "text": "x"}"#).unwrap();
        let b = Corpus::from_jsonl(r#"{"id": "a", "year": 2000, "text": "y"}"#).unwrap();
        assert_ne!(a.fingerprint(), b.fingerprint());
    }
}
