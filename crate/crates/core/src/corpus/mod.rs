//! Evidence sources and query execution.
//!
//! Three backends implement [`EvidenceSource`]:
//!
//! * [`Corpus`]: a deterministic offline document collection loaded from
//!   JSON Lines. Matching is conjunctive case-folded containment.
//! * [`RecordedSource`]: replayed per-query counts captured from some other
//!   engine, keyed by the rendered plain query string.
//! * [`RemoteSource`]: a configuration-driven HTTP hit-count connector.
//!
//! [`observe_series`] runs the marker-only query plus every combinatorial
//! query of a pattern and caches the resulting [`ObservationSeries`].

mod cache;
mod engine;
mod offline;
mod recorded;
mod remote;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pattern::{enumerate_queries, Query, SearchPattern};

pub use cache::SeriesCache;
pub use engine::{load_engine, parse_engine, EngineConfigError};
pub use offline::{Corpus, CorpusDocument, CorpusError, RankedHit, RankedSource};
pub use recorded::RecordedSource;
pub use remote::{RemoteConfig, RemoteSource};

/// Environment variable overriding the series cache directory.
pub const CACHE_DIR_ENV: &str = "INNOMETER_CACHE_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservationKind {
    /// Number of retrieved documents (R).
    Hits,
    /// User-interest signal (F).
    Interest,
}

impl fmt::Display for ObservationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObservationKind::Hits => "hits",
            ObservationKind::Interest => "interest",
        })
    }
}

impl FromStr for ObservationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hits" => Ok(ObservationKind::Hits),
            "interest" => Ok(ObservationKind::Interest),
            other => Err(format!("unknown observation kind `{other}`")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SourceError {
    #[error("{engine_id}: request timed out")]
    Timeout { engine_id: String },
    #[error("{engine_id}: unparseable count ({detail})")]
    Unparseable { engine_id: String, detail: String },
    #[error("{engine_id}: {what} not supported by this source")]
    Unsupported { engine_id: String, what: String },
    #[error("{engine_id}: remote connector is disabled (set \"enabled\": true)")]
    Disabled { engine_id: String },
    #[error("{engine_id}: no recorded {kind} count for `{query}`")]
    NotRecorded {
        engine_id: String,
        kind: ObservationKind,
        query: String,
    },
    #[error("{engine_id}: transport failure ({detail})")]
    Transport { engine_id: String, detail: String },
    #[error("query {index}: {source}")]
    AtQuery {
        index: usize,
        #[source]
        source: Box<SourceError>,
    },
}

impl SourceError {
    pub fn engine_id(&self) -> &str {
        match self {
            SourceError::Timeout { engine_id }
            | SourceError::Unparseable { engine_id, .. }
            | SourceError::Unsupported { engine_id, .. }
            | SourceError::Disabled { engine_id }
            | SourceError::NotRecorded { engine_id, .. }
            | SourceError::Transport { engine_id, .. } => engine_id,
            SourceError::AtQuery { source, .. } => source.engine_id(),
        }
    }
}

/// Anything that can count documents (or interest) for a conjunction of
/// phrases.
pub trait EvidenceSource: Send + Sync {
    fn engine_id(&self) -> &str;

    /// Identifies the source's content for caching. Two sources with the same
    /// id and fingerprint must return the same counts.
    fn fingerprint(&self) -> String;

    /// Count for the conjunction of `phrases`. The first phrase is the marker.
    fn count(
        &self,
        phrases: &[&str],
        kind: ObservationKind,
        year: Option<i32>,
    ) -> Result<u64, SourceError>;
}

/// One engine's counts for the marker-only query and all `S` queries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationSeries {
    pub engine_id: String,
    pub kind: ObservationKind,
    /// Count for the marker-only query (R_0 or F_0).
    pub baseline: u64,
    /// Counts ordered by query index.
    pub values: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
}

impl ObservationSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn query_count(
    source: &dyn EvidenceSource,
    query: &Query,
    pattern: &SearchPattern,
    kind: ObservationKind,
    year: Option<i32>,
) -> Result<u64, SourceError> {
    // Query indices come from enumerate_queries over the same pattern.
    let phrases = pattern
        .query_phrases(query)
        .expect("query enumerated from this pattern");
    source.count(&phrases, kind, year)
}

/// Documents matching the marker and every term of `query`.
pub fn hit_count(
    source: &dyn EvidenceSource,
    query: &Query,
    pattern: &SearchPattern,
    year: Option<i32>,
) -> Result<u64, SourceError> {
    query_count(source, query, pattern, ObservationKind::Hits, year)
}

/// Documents matching the marker alone.
pub fn marker_count(
    source: &dyn EvidenceSource,
    pattern: &SearchPattern,
    year: Option<i32>,
) -> Result<u64, SourceError> {
    source.count(&[pattern.marker()], ObservationKind::Hits, year)
}

/// Interest signal for the documents matching `query`.
pub fn interest_count(
    source: &dyn EvidenceSource,
    query: &Query,
    pattern: &SearchPattern,
    year: Option<i32>,
) -> Result<u64, SourceError> {
    query_count(source, query, pattern, ObservationKind::Interest, year)
}

#[derive(Debug, Clone, Copy)]
pub struct ObserveOptions<'a> {
    pub cache: Option<&'a SeriesCache>,
    /// Upper bound on concurrently executing queries.
    pub parallelism: usize,
}

impl Default for ObserveOptions<'_> {
    fn default() -> Self {
        ObserveOptions {
            cache: None,
            parallelism: 1,
        }
    }
}

/// Runs the marker-only query and all `S` queries of `pattern`.
///
/// Results are assembled in query-index order regardless of execution
/// order. With a cache, a hit returns the stored series without touching
/// the source.
pub fn observe_series(
    source: &dyn EvidenceSource,
    pattern: &SearchPattern,
    kind: ObservationKind,
    year: Option<i32>,
    options: ObserveOptions<'_>,
) -> Result<ObservationSeries, SourceError> {
    let key = options
        .cache
        .map(|cache| (cache, SeriesCache::key(source, pattern, kind, year)));
    if let Some((cache, key)) = &key {
        if let Some(series) = cache.get(key) {
            return Ok(series);
        }
    }

    let baseline = source
        .count(&[pattern.marker()], kind, year)
        .map_err(|e| SourceError::AtQuery {
            index: 0,
            source: Box::new(e),
        })?;
    let queries = enumerate_queries(pattern);
    let run = |q: &Query| query_count(source, q, pattern, kind, year);
    let results: Vec<Result<u64, SourceError>> = if options.parallelism > 1 {
        match rayon::ThreadPoolBuilder::new()
            .num_threads(options.parallelism)
            .build()
        {
            Ok(pool) => pool.install(|| queries.par_iter().map(run).collect()),
            Err(_) => queries.iter().map(run).collect(),
        }
    } else {
        queries.iter().map(run).collect()
    };
    let mut values = Vec::with_capacity(results.len());
    for (query, result) in queries.iter().zip(results) {
        values.push(result.map_err(|e| SourceError::AtQuery {
            index: query.index,
            source: Box::new(e),
        })?);
    }

    let series = ObservationSeries {
        engine_id: source.engine_id().to_string(),
        kind,
        baseline,
        values,
        year,
    };
    if let Some((cache, key)) = &key {
        // A failed write only costs a future re-query.
        let _ = cache.put(key, &series);
    }
    Ok(series)
}
