//! Innovativeness indicators for objects described by a marker + key-terms
//! linguistic model.
//!
//! The pipeline is:
//!
//! 1. [`pattern`] enumerates every nonempty subset of key terms as a query
//!    (the marker is prefixed to each one).
//! 2. [`corpus`] executes the queries against an evidence source and records
//!    hit / interest counts as an [`corpus::ObservationSeries`].
//! 3. [`indicators`] normalizes the counts, computes novelty and relevance and
//!    bins the normalized values into nominal intervals.
//! 4. [`evidence`] turns the interval groups into Dempster-Shafer mass
//!    assignments, fuses several sources and derives belief-based
//!    probabilities.
//! 5. [`evolver`] builds a linguistic model from reference terms with a
//!    genetic algorithm over coded queries.
//! 6. [`trend`] computes per-year series, least-squares fits and correlation.

pub mod corpus;
pub mod evidence;
pub mod evolver;
pub mod indicators;
pub mod pattern;
pub mod report;
pub mod text;
pub mod trend;

pub use corpus::{Corpus, CorpusDocument, ObservationKind, ObservationSeries, SourceError};
pub use evidence::{FusionResult, MassAssignment};
pub use indicators::{IndicatorKind, NormalizationMode, PartitionStrategy};
pub use pattern::{Dialect, Query, SearchPattern};
