//! Search patterns (marker + key terms) and the combinatorial query set.
//!
//! A pattern with `N` key terms yields `2^N - 1` queries: one per nonempty
//! subset of the term indices `{1..N}`. The marker is implied in every query
//! and only materialized when a query is rendered.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::text;

/// Largest supported number of key terms; caps the query count at 4095.
pub const MAX_TERMS: usize = 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatternError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("field `marker`: marker must not be empty")]
    EmptyMarker,
    #[error("field `terms`: at least one key term is required")]
    NoTerms,
    #[error("field `terms[{index}]`: key term must not be empty")]
    EmptyTerm { index: usize },
    #[error("field `terms[{index}]`: duplicate key term `{term}`")]
    DuplicateTerm { index: usize, term: String },
    #[error("field `terms[{index}]`: key term `{term}` repeats the marker")]
    MarkerAsTerm { index: usize, term: String },
    #[error("term count {count} out of range: a pattern holds 1 to {max} key terms")]
    TermCount { count: usize, max: usize },
    #[error("field `synonyms.{term}`: {reason}")]
    Synonym { term: String, reason: String },
    #[error("query term index {index} out of range for a pattern with {terms} terms")]
    QueryOutOfRange { index: usize, terms: usize },
    #[error("unknown query dialect `{0}` (expected `plain` or `conjunctive`)")]
    UnknownDialect(String),
}

/// On-disk shape of a pattern file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PatternDocument {
    marker: String,
    terms: Vec<String>,
    #[serde(default)]
    synonyms: BTreeMap<String, Vec<String>>,
}

/// The linguistic model of a target object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchPattern {
    marker: String,
    terms: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    synonyms: BTreeMap<String, Vec<String>>,
}

impl SearchPattern {
    pub fn new(
        marker: impl Into<String>,
        terms: Vec<String>,
        synonyms: BTreeMap<String, Vec<String>>,
    ) -> Result<Self, PatternError> {
        let pattern = SearchPattern {
            marker: marker.into().trim().to_string(),
            terms: terms.into_iter().map(|t| t.trim().to_string()).collect(),
            synonyms,
        };
        pattern.validate(Some(MAX_TERMS))?;
        Ok(pattern)
    }

    /// Builds a pattern without the term-count cap. Used for reference term
    /// sets, which are never enumerated combinatorially.
    pub(crate) fn new_uncapped(
        marker: impl Into<String>,
        terms: Vec<String>,
        synonyms: BTreeMap<String, Vec<String>>,
    ) -> Result<Self, PatternError> {
        let pattern = SearchPattern {
            marker: marker.into().trim().to_string(),
            terms: terms.into_iter().map(|t| t.trim().to_string()).collect(),
            synonyms,
        };
        pattern.validate(None)?;
        Ok(pattern)
    }

    fn validate(&self, cap: Option<usize>) -> Result<(), PatternError> {
        if self.marker.is_empty() {
            return Err(PatternError::EmptyMarker);
        }
        if self.terms.is_empty() {
            return Err(PatternError::NoTerms);
        }
        if let Some(max) = cap {
            if self.terms.len() > max {
                return Err(PatternError::TermCount {
                    count: self.terms.len(),
                    max,
                });
            }
        }
        let marker = text::fold(&self.marker);
        let mut seen = HashSet::new();
        for (index, term) in self.terms.iter().enumerate() {
            if term.is_empty() {
                return Err(PatternError::EmptyTerm { index });
            }
            let folded = text::fold(term);
            if folded == marker {
                return Err(PatternError::MarkerAsTerm {
                    index,
                    term: term.clone(),
                });
            }
            if !seen.insert(folded) {
                return Err(PatternError::DuplicateTerm {
                    index,
                    term: term.clone(),
                });
            }
        }
        for (head, list) in &self.synonyms {
            let folded_head = text::fold(head);
            if !seen.contains(&folded_head) {
                return Err(PatternError::Synonym {
                    term: head.clone(),
                    reason: "headword is not one of the key terms".into(),
                });
            }
            for synonym in list {
                let folded = text::fold(synonym);
                if folded.is_empty() {
                    return Err(PatternError::Synonym {
                        term: head.clone(),
                        reason: "empty synonym".into(),
                    });
                }
                if folded == folded_head {
                    return Err(PatternError::Synonym {
                        term: head.clone(),
                        reason: format!("synonym `{synonym}` repeats its headword"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn marker(&self) -> &str {
        &self.marker
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Synonyms registered for `term`; empty when none are known.
    pub fn synonyms_of(&self, term: &str) -> &[String] {
        self.synonyms.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn synonyms(&self) -> &BTreeMap<String, Vec<String>> {
        &self.synonyms
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("pattern serializes");
        hex::encode(Sha256::digest(&canonical))
    }

    /// Marker followed by the key terms of `query`, in index order.
    pub fn query_phrases(&self, query: &Query) -> Result<Vec<&str>, PatternError> {
        let mut phrases = Vec::with_capacity(query.terms.len() + 1);
        phrases.push(self.marker.as_str());
        for &index in &query.terms {
            let term = index
                .checked_sub(1)
                .and_then(|i| self.terms.get(i))
                .ok_or(PatternError::QueryOutOfRange {
                    index,
                    terms: self.terms.len(),
                })?;
            phrases.push(term);
        }
        Ok(phrases)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pattern serializes")
    }
}

/// One query: a nonempty subset of 1-based term indices. The marker is
/// implied.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Query {
    /// Position in the enumeration, 1-based.
    pub index: usize,
    /// Sorted 1-based term indices.
    pub terms: Vec<usize>,
}

/// Number of queries for `n` key terms: `1 + sum_{c=1}^{n-1} C(n, c)`, which
/// is `2^n - 1`.
pub fn count_queries(n: usize) -> Result<usize, PatternError> {
    if !(1..=MAX_TERMS).contains(&n) {
        return Err(PatternError::TermCount {
            count: n,
            max: MAX_TERMS,
        });
    }
    let partial: usize = (1..n).map(|c| binomial(n, c)).sum();
    Ok(1 + partial)
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// All nonempty term subsets ordered by size, then lexicographically.
pub fn enumerate_queries(pattern: &SearchPattern) -> Vec<Query> {
    enumerate_subsets(pattern.term_count())
}

pub(crate) fn enumerate_subsets(n: usize) -> Vec<Query> {
    (1..=n)
        .flat_map(|size| (1..=n).combinations(size))
        .enumerate()
        .map(|(i, terms)| Query {
            index: i + 1,
            terms,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dialect {
    /// Space separated, the way a web search box takes it.
    #[default]
    Plain,
    /// Joined with ` AND `.
    Conjunctive,
}

impl FromStr for Dialect {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" => Ok(Dialect::Plain),
            "conjunctive" => Ok(Dialect::Conjunctive),
            other => Err(PatternError::UnknownDialect(other.to_string())),
        }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dialect::Plain => "plain",
            Dialect::Conjunctive => "conjunctive",
        })
    }
}

/// Renders a list of phrases, quoting the multiword ones.
pub fn render_phrases<S: AsRef<str>>(phrases: &[S], dialect: Dialect) -> String {
    let separator = match dialect {
        Dialect::Plain => " ",
        Dialect::Conjunctive => " AND ",
    };
    phrases
        .iter()
        .map(|p| {
            let p = p.as_ref();
            if p.split_whitespace().nth(1).is_some() {
                format!("\"{p}\"")
            } else {
                p.to_string()
            }
        })
        .join(separator)
}

/// Marker first, then the query's terms in index order.
pub fn render_query(
    query: &Query,
    pattern: &SearchPattern,
    dialect: Dialect,
) -> Result<String, PatternError> {
    Ok(render_phrases(&pattern.query_phrases(query)?, dialect))
}

/// Parses and validates a pattern file.
pub fn parse_pattern(document: &str) -> Result<SearchPattern, PatternError> {
    let raw = parse_document(document)?;
    SearchPattern::new(raw.marker, raw.terms, raw.synonyms)
}

/// Same file format as [`parse_pattern`] without the term-count cap.
pub(crate) fn parse_uncapped(document: &str) -> Result<SearchPattern, PatternError> {
    let raw = parse_document(document)?;
    SearchPattern::new_uncapped(raw.marker, raw.terms, raw.synonyms)
}

fn parse_document(document: &str) -> Result<PatternDocument, PatternError> {
    serde_json::from_str(document).map_err(|e| PatternError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}
