//! Normalization of raw counts, the novelty and relevance indicators, and
//! interval binning of the normalized values.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ObservationKind, ObservationSeries};
use crate::evidence::{self, EvidenceError, MassAssignment};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndicatorError {
    #[error("unusable pattern: marker-only query returned no documents")]
    ZeroBaseline,
    #[error("expected a {expected} series, got {got}")]
    WrongKind {
        expected: ObservationKind,
        got: ObservationKind,
    },
    #[error("observation series is empty")]
    EmptySeries,
    #[error(transparent)]
    Evidence(#[from] EvidenceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationMode {
    /// `clamp(1 - exp(1 - raw/baseline), 0, 1)`.
    Verbatim,
    /// `1 - exp(-raw/baseline)`.
    #[default]
    Saturating,
}

impl FromStr for NormalizationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "verbatim" => Ok(Self::Verbatim),
            "saturating" => Ok(Self::Saturating),
            other => Err(format!("unknown normalization mode `{other}`")),
        }
    }
}

impl fmt::Display for NormalizationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Verbatim => "verbatim",
            Self::Saturating => "saturating",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionStrategy {
    #[default]
    Equal,
    Quantile,
}

impl FromStr for PartitionStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "equal" => Ok(Self::Equal),
            "quantile" => Ok(Self::Quantile),
            other => Err(format!("unknown partition strategy `{other}`")),
        }
    }
}

impl fmt::Display for PartitionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Equal => "equal",
            Self::Quantile => "quantile",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndicatorKind {
    Novelty,
    Relevance,
}

impl IndicatorKind {
    pub fn observation_kind(self) -> ObservationKind {
        match self {
            IndicatorKind::Novelty => ObservationKind::Hits,
            IndicatorKind::Relevance => ObservationKind::Interest,
        }
    }

    /// 1-based interval numbers whose belief yields the indicator
    /// probability: the lower half for novelty (few hits), the upper half for
    /// relevance (much interest).
    pub fn target_intervals(self, intervals: usize) -> Vec<usize> {
        let half = intervals / 2;
        match self {
            IndicatorKind::Novelty => (1..=half).collect(),
            IndicatorKind::Relevance => (intervals - half + 1..=intervals).collect(),
        }
    }
}

impl fmt::Display for IndicatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IndicatorKind::Novelty => "novelty",
            IndicatorKind::Relevance => "relevance",
        })
    }
}

impl FromStr for IndicatorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "novelty" => Ok(Self::Novelty),
            "relevance" => Ok(Self::Relevance),
            other => Err(format!("unknown indicator `{other}`")),
        }
    }
}

/// Maps a raw count into [0, 1] relative to the marker-only baseline.
pub fn normalize_count(
    raw: u64,
    baseline: u64,
    mode: NormalizationMode,
) -> Result<f64, IndicatorError> {
    if baseline == 0 {
        return Err(IndicatorError::ZeroBaseline);
    }
    let ratio = raw as f64 / baseline as f64;
    let value = match mode {
        NormalizationMode::Verbatim => 1.0 - (1.0 - ratio).exp(),
        NormalizationMode::Saturating => -(-ratio).exp_m1(),
    };
    Ok(value.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedSeries {
    pub values: Vec<f64>,
    pub mode: NormalizationMode,
    pub baseline_raw: u64,
}

pub fn normalize_series(
    series: &ObservationSeries,
    mode: NormalizationMode,
) -> Result<NormalizedSeries, IndicatorError> {
    if series.values.is_empty() {
        return Err(IndicatorError::EmptySeries);
    }
    let values = series
        .values
        .iter()
        .map(|&raw| normalize_count(raw, series.baseline, mode))
        .collect::<Result<_, _>>()?;
    Ok(NormalizedSeries {
        values,
        mode,
        baseline_raw: series.baseline,
    })
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn expect_kind(series: &ObservationSeries, expected: ObservationKind) -> Result<(), IndicatorError> {
    if series.kind != expected {
        return Err(IndicatorError::WrongKind {
            expected,
            got: series.kind,
        });
    }
    Ok(())
}

/// `Nv = 1 - mean(normalized R_k)`. Fewer hits mean higher novelty.
pub fn novelty(series: &ObservationSeries, mode: NormalizationMode) -> Result<f64, IndicatorError> {
    expect_kind(series, ObservationKind::Hits)?;
    let normalized = normalize_series(series, mode)?;
    Ok((1.0 - mean(&normalized.values)).clamp(0.0, 1.0))
}

/// `Rl = mean(normalized F_k)`.
pub fn relevance(
    series: &ObservationSeries,
    mode: NormalizationMode,
) -> Result<f64, IndicatorError> {
    expect_kind(series, ObservationKind::Interest)?;
    let normalized = normalize_series(series, mode)?;
    Ok(mean(&normalized.values).clamp(0.0, 1.0))
}

/// Number of group intervals: `sqrt(S)` rounded half-up, at least 1.
pub fn bin_count(queries: usize) -> usize {
    ((queries as f64).sqrt() + 0.5).floor().max(1.0) as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalPartition {
    /// `0 = b_0 < b_1 < ... < b_I = 1`.
    pub boundaries: Vec<f64>,
    pub labels: Vec<String>,
}

impl IntervalPartition {
    pub fn len(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// 0-based interval holding `value`: `b_{i-1} <= v < b_i`, with the last
    /// interval closed at 1.
    pub fn locate(&self, value: f64) -> usize {
        let interior = &self.boundaries[1..self.boundaries.len() - 1];
        interior.partition_point(|&b| b <= value)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.len(), "one label per interval");
        self.labels = labels;
        self
    }

    fn equal(intervals: usize) -> Self {
        let boundaries = (0..=intervals)
            .map(|i| i as f64 / intervals as f64)
            .collect();
        IntervalPartition {
            boundaries,
            labels: generated_labels(intervals),
        }
    }
}

/// Empirical quantile with linear interpolation between order statistics.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn make_partition(
    values: &[f64],
    intervals: usize,
    strategy: PartitionStrategy,
) -> IntervalPartition {
    let intervals = intervals.max(1);
    match strategy {
        PartitionStrategy::Equal => IntervalPartition::equal(intervals),
        PartitionStrategy::Quantile => {
            if values.is_empty() {
                return IntervalPartition::equal(intervals);
            }
            let mut sorted = values.to_vec();
            sorted.sort_by(f64::total_cmp);
            let mut interior: Vec<f64> = (1..intervals)
                .map(|i| quantile(&sorted, i as f64 / intervals as f64))
                .filter(|&b| b > 0.0 && b < 1.0)
                .collect();
            interior.dedup();
            if interior.len() + 1 < intervals {
                return IntervalPartition::equal(intervals);
            }
            let mut boundaries = Vec::with_capacity(intervals + 1);
            boundaries.push(0.0);
            boundaries.extend(interior);
            boundaries.push(1.0);
            IntervalPartition {
                boundaries,
                labels: generated_labels(intervals),
            }
        }
    }
}

/// Query indices (1-based) per interval.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalGrouping {
    pub groups: Vec<Vec<usize>>,
}

impl IntervalGrouping {
    /// `q_k` per interval.
    pub fn counts(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    pub fn total(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn interval_count(&self) -> usize {
        self.groups.len()
    }

    /// 0-based interval of every query, by query index.
    pub fn interval_of_queries(&self) -> Vec<usize> {
        let mut out = vec![0; self.total()];
        for (interval, group) in self.groups.iter().enumerate() {
            for &k in group {
                out[k - 1] = interval;
            }
        }
        out
    }
}

pub fn group_by_interval(values: &[f64], partition: &IntervalPartition) -> IntervalGrouping {
    let mut groups = vec![Vec::new(); partition.len()];
    for (i, &v) in values.iter().enumerate() {
        groups[partition.locate(v)].push(i + 1);
    }
    IntervalGrouping { groups }
}

fn generated_labels(intervals: usize) -> Vec<String> {
    (1..=intervals)
        .map(|i| format!("level {i}/{intervals}"))
        .collect()
}

pub fn nominal_labels(intervals: usize, kind: IndicatorKind) -> Vec<String> {
    if intervals == 4 && kind == IndicatorKind::Novelty {
        [
            "It is novel",
            "It is evidently novel",
            "It is evidently not novel",
            "It is not novel",
        ]
        .map(String::from)
        .to_vec()
    } else {
        generated_labels(intervals)
    }
}

/// Mean and population standard deviation.
pub fn summary_stats(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / values.len() as f64;
    Some((m, var.sqrt()))
}

/// Everything derived from one engine's series for one indicator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorReport {
    pub kind: IndicatorKind,
    /// Nv or Rl.
    pub value: f64,
    pub series: ObservationSeries,
    pub normalized: NormalizedSeries,
    pub partition: IntervalPartition,
    pub grouping: IntervalGrouping,
    pub assignment: MassAssignment,
    /// Belief over the indicator's target intervals, p(Nv) or p(Rl).
    pub probability: f64,
    /// Set when the marker-only query found nothing and every query count is
    /// zero; all normalized values are then taken as 0.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub empty_baseline: bool,
}

impl IndicatorReport {
    /// One row per query: `k,raw,normalized,interval` (interval is 1-based).
    pub fn to_csv(&self) -> String {
        let intervals = self.grouping.interval_of_queries();
        let mut out = String::from("k,raw,normalized,interval\n");
        for (i, (raw, norm)) in self
            .series
            .values
            .iter()
            .zip(&self.normalized.values)
            .enumerate()
        {
            out.push_str(&format!("{},{},{},{}\n", i + 1, raw, norm, intervals[i] + 1));
        }
        out
    }
}

/// Runs normalization, the indicator formula, binning and the base
/// probability assignment for one series.
pub fn assess(
    series: &ObservationSeries,
    kind: IndicatorKind,
    mode: NormalizationMode,
    strategy: PartitionStrategy,
) -> Result<IndicatorReport, IndicatorError> {
    expect_kind(series, kind.observation_kind())?;
    let (normalized, empty_baseline) = match normalize_series(series, mode) {
        Ok(n) => (n, false),
        Err(IndicatorError::ZeroBaseline) if series.values.iter().all(|&v| v == 0) => (
            NormalizedSeries {
                values: vec![0.0; series.values.len()],
                mode,
                baseline_raw: 0,
            },
            true,
        ),
        Err(e) => return Err(e),
    };
    let m = mean(&normalized.values);
    let value = match kind {
        IndicatorKind::Novelty => 1.0 - m,
        IndicatorKind::Relevance => m,
    }
    .clamp(0.0, 1.0);
    let intervals = bin_count(series.values.len());
    let partition = make_partition(&normalized.values, intervals, strategy)
        .with_labels(nominal_labels(intervals, kind));
    let grouping = group_by_interval(&normalized.values, &partition);
    let assignment = evidence::base_probability(&grouping, &series.engine_id)?;
    let probability = evidence::indicator_probability(&assignment, kind)?;
    Ok(IndicatorReport {
        kind,
        value,
        series: series.clone(),
        normalized,
        partition,
        grouping,
        assignment,
        probability,
        empty_baseline,
    })
}
