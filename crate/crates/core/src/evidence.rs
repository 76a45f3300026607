//! Dempster-Shafer evidence over the frame of query indices `{1..S}`.
//!
//! Focal sets are sorted index vectors. Assignments built from an interval
//! grouping remember which interval each focal set came from, which lets a
//! fused result be projected back onto the nominal intervals.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::indicators::{IndicatorKind, IntervalGrouping};

/// Absolute tolerance for mass sums and conflict comparisons.
pub const TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvidenceError {
    #[error("focal set {position} is empty")]
    EmptyFocal { position: usize },
    #[error("index {index} outside the frame 1..={frame_size}")]
    OutOfFrame { index: usize, frame_size: usize },
    #[error("focal set {position} has non-positive mass {mass}")]
    NonPositiveMass { position: usize, mass: f64 },
    #[error("masses sum to {sum}, more than 1")]
    MassOverflow { sum: f64 },
    #[error("focal set {position} appears twice")]
    DuplicateFocal { position: usize },
    #[error("frame sizes differ: {left} vs {right}")]
    FrameMismatch { left: usize, right: usize },
    #[error("total conflict: Dempster combination is undefined")]
    TotalConflict,
    #[error("discount factor {0} outside [0, 1]")]
    Alpha(f64),
    #[error("grouping holds no queries")]
    EmptyGrouping,
    #[error("assignment carries no interval information")]
    NoIntervals,
    #[error("unknown discounting style `{0}`")]
    UnknownStyle(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Focal {
    /// Sorted, 1-based query indices.
    pub set: Vec<usize>,
    pub mass: f64,
    /// 1-based interval the set was grouped under.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<usize>,
}

/// Basic probability assignment. Immutable once validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAssignment")]
pub struct MassAssignment {
    frame_size: usize,
    focal: Vec<Focal>,
    origin: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    interval_count: Option<usize>,
}

#[derive(Deserialize)]
struct RawAssignment {
    frame_size: usize,
    focal: Vec<Focal>,
    origin: String,
    #[serde(default)]
    interval_count: Option<usize>,
}

impl TryFrom<RawAssignment> for MassAssignment {
    type Error = EvidenceError;

    fn try_from(raw: RawAssignment) -> Result<Self, Self::Error> {
        let mut m = MassAssignment::new(raw.frame_size, raw.focal, raw.origin)?;
        m.interval_count = raw.interval_count;
        Ok(m)
    }
}

impl MassAssignment {
    /// Validates and sorts each focal set. Masses must be positive and sum
    /// to at most 1 (less after paper-style discounting).
    pub fn new(
        frame_size: usize,
        mut focal: Vec<Focal>,
        origin: impl Into<String>,
    ) -> Result<Self, EvidenceError> {
        let mut sum = 0.0;
        for (position, f) in focal.iter_mut().enumerate() {
            f.set.sort_unstable();
            f.set.dedup();
            if f.set.is_empty() {
                return Err(EvidenceError::EmptyFocal { position });
            }
            if let Some(&bad) = f.set.iter().find(|&&i| i == 0 || i > frame_size) {
                return Err(EvidenceError::OutOfFrame {
                    index: bad,
                    frame_size,
                });
            }
            if f.mass.is_nan() || f.mass <= 0.0 {
                return Err(EvidenceError::NonPositiveMass {
                    position,
                    mass: f.mass,
                });
            }
            sum += f.mass;
        }
        if sum > 1.0 + TOLERANCE {
            return Err(EvidenceError::MassOverflow { sum });
        }
        let mut seen = std::collections::HashSet::new();
        for (position, f) in focal.iter().enumerate() {
            if !seen.insert(&f.set) {
                return Err(EvidenceError::DuplicateFocal { position });
            }
        }
        Ok(MassAssignment {
            frame_size,
            focal,
            origin: origin.into(),
            interval_count: None,
        })
    }

    /// All mass on the whole frame: total ignorance.
    pub fn vacuous(frame_size: usize, origin: impl Into<String>) -> Self {
        MassAssignment {
            frame_size,
            focal: vec![Focal {
                set: (1..=frame_size).collect(),
                mass: 1.0,
                interval: None,
            }],
            origin: origin.into(),
            interval_count: None,
        }
    }

    pub fn frame_size(&self) -> usize {
        self.frame_size
    }

    pub fn focal(&self) -> &[Focal] {
        &self.focal
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }

    pub fn interval_count(&self) -> Option<usize> {
        self.interval_count
    }

    pub fn total_mass(&self) -> f64 {
        self.focal.iter().map(|f| f.mass).sum()
    }

    /// Mass carried by each interval's focal sets.
    pub fn interval_masses(&self) -> Result<Vec<f64>, EvidenceError> {
        let count = self.interval_count.ok_or(EvidenceError::NoIntervals)?;
        let mut out = vec![0.0; count];
        for f in &self.focal {
            if let Some(i) = f.interval {
                out[i - 1] += f.mass;
            }
        }
        Ok(out)
    }

    fn membership(&self, set: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.frame_size + 1];
        for &i in set {
            if i <= self.frame_size {
                mask[i] = true;
            }
        }
        mask
    }
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn disjoint(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return false,
        }
    }
    true
}

/// `m(A_k) = q_k / S`, one focal set per nonempty interval group.
pub fn base_probability(
    grouping: &IntervalGrouping,
    origin: &str,
) -> Result<MassAssignment, EvidenceError> {
    let total = grouping.total();
    if total == 0 {
        return Err(EvidenceError::EmptyGrouping);
    }
    let focal = grouping
        .groups
        .iter()
        .enumerate()
        .filter(|(_, g)| !g.is_empty())
        .map(|(i, g)| Focal {
            set: g.clone(),
            mass: g.len() as f64 / total as f64,
            interval: Some(i + 1),
        })
        .collect();
    let mut m = MassAssignment::new(total, focal, origin)?;
    m.interval_count = Some(grouping.interval_count());
    Ok(m)
}

/// Total mass of focal sets contained in `set`.
pub fn belief(m: &MassAssignment, set: &[usize]) -> f64 {
    let mask = m.membership(set);
    m.focal
        .iter()
        .filter(|f| f.set.iter().all(|&i| mask[i]))
        .map(|f| f.mass)
        .sum()
}

/// Total mass of focal sets intersecting `set`.
pub fn plausibility(m: &MassAssignment, set: &[usize]) -> f64 {
    let mask = m.membership(set);
    m.focal
        .iter()
        .filter(|f| f.set.iter().any(|&i| mask[i]))
        .map(|f| f.mass)
        .sum()
}

fn check_frames(m1: &MassAssignment, m2: &MassAssignment) -> Result<(), EvidenceError> {
    if m1.frame_size != m2.frame_size {
        return Err(EvidenceError::FrameMismatch {
            left: m1.frame_size,
            right: m2.frame_size,
        });
    }
    Ok(())
}

/// Conflict factor K: product mass falling on empty intersections.
pub fn conflict(m1: &MassAssignment, m2: &MassAssignment) -> Result<f64, EvidenceError> {
    check_frames(m1, m2)?;
    let mut k = 0.0;
    for a in &m1.focal {
        for b in &m2.focal {
            if disjoint(&a.set, &b.set) {
                k += a.mass * b.mass;
            }
        }
    }
    Ok(k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionResult {
    pub conflict: f64,
    pub combined: MassAssignment,
    /// Combined mass per interval of the first argument; empty when the
    /// first argument carries no interval information.
    pub interval_masses: Vec<f64>,
    pub belief_lower_half: f64,
    pub belief_upper_half: f64,
}

impl FusionResult {
    /// Fused p(Nv) (lower half) or p(Rl) (upper half).
    pub fn probability(&self, kind: IndicatorKind) -> f64 {
        match kind {
            IndicatorKind::Novelty => self.belief_lower_half,
            IndicatorKind::Relevance => self.belief_upper_half,
        }
    }
}

/// Dempster's rule of combination.
///
/// The set-level result is symmetric in its arguments. The interval
/// projection is not: every product term is credited to the interval of its
/// first-argument focal set.
pub fn combine(m1: &MassAssignment, m2: &MassAssignment) -> Result<FusionResult, EvidenceError> {
    check_frames(m1, m2)?;
    let k = conflict(m1, m2)?;
    let norm = 1.0 - k;
    if norm <= TOLERANCE {
        return Err(EvidenceError::TotalConflict);
    }

    let intervals = m1.interval_count.unwrap_or(0);
    let mut interval_masses = vec![0.0; intervals];
    let mut combined: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for a in &m1.focal {
        for b in &m2.focal {
            let common = intersect(&a.set, &b.set);
            if common.is_empty() {
                continue;
            }
            let product = a.mass * b.mass;
            *combined.entry(common).or_insert(0.0) += product;
            if let Some(i) = a.interval {
                interval_masses[i - 1] += product / norm;
            }
        }
    }
    let focal = combined
        .into_iter()
        .map(|(set, mass)| Focal {
            set,
            mass: mass / norm,
            interval: None,
        })
        .filter(|f| f.mass > 0.0)
        .collect();
    let combined = MassAssignment::new(
        m1.frame_size,
        focal,
        format!("{}+{}", m1.origin, m2.origin),
    )?;
    let half = intervals / 2;
    let belief_lower_half = interval_masses[..half].iter().sum();
    let belief_upper_half = interval_masses[intervals - half..].iter().sum();
    Ok(FusionResult {
        conflict: k,
        combined,
        interval_masses,
        belief_lower_half,
        belief_upper_half,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiscountStyle {
    /// Scale every mass by `1 - alpha` and leave the remainder unassigned.
    #[default]
    Paper,
    /// Scale by `1 - alpha` and move `alpha` onto the whole frame.
    Shafer,
}

impl std::str::FromStr for DiscountStyle {
    type Err = EvidenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Self::Paper),
            "shafer" => Ok(Self::Shafer),
            other => Err(EvidenceError::UnknownStyle(other.into())),
        }
    }
}

impl std::fmt::Display for DiscountStyle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Paper => "paper",
            Self::Shafer => "shafer",
        })
    }
}

/// Credibility discounting, `m'(A) = (1 - alpha) m(A)`.
pub fn discount(
    m: &MassAssignment,
    alpha: f64,
    style: DiscountStyle,
) -> Result<MassAssignment, EvidenceError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(EvidenceError::Alpha(alpha));
    }
    let keep = 1.0 - alpha;
    let mut focal: Vec<Focal> = m
        .focal
        .iter()
        .map(|f| Focal {
            mass: f.mass * keep,
            ..f.clone()
        })
        .filter(|f| f.mass > 0.0)
        .collect();
    if style == DiscountStyle::Shafer && alpha > 0.0 {
        let frame: Vec<usize> = (1..=m.frame_size).collect();
        match focal.iter_mut().find(|f| f.set == frame) {
            Some(f) => f.mass += alpha,
            None => focal.push(Focal {
                set: frame,
                mass: alpha,
                interval: None,
            }),
        }
    }
    let mut out = MassAssignment::new(m.frame_size, focal, m.origin.clone())?;
    out.interval_count = m.interval_count;
    Ok(out)
}

/// Belief in the union of the indicator's target intervals.
pub fn indicator_probability(
    m: &MassAssignment,
    kind: IndicatorKind,
) -> Result<f64, EvidenceError> {
    let intervals = m.interval_count.ok_or(EvidenceError::NoIntervals)?;
    let targets = kind.target_intervals(intervals);
    let union: Vec<usize> = m
        .focal
        .iter()
        .filter(|f| f.interval.is_some_and(|i| targets.contains(&i)))
        .flat_map(|f| f.set.iter().copied())
        .collect();
    Ok(belief(m, &union))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grouping(groups: &[&[usize]]) -> IntervalGrouping {
        IntervalGrouping {
            groups: groups.iter().map(|g| g.to_vec()).collect(),
        }
    }

    fn se1() -> MassAssignment {
        base_probability(
            &grouping(&[&[1, 2, 3], &[4, 5, 7, 8], &[6, 9, 10, 11, 12, 13, 14], &[15]]),
            "SE1",
        )
        .unwrap()
    }

    fn se2() -> MassAssignment {
        base_probability(
            &grouping(&[&[8, 9, 10, 11, 12, 13], &[2, 4, 5, 6, 14, 15], &[1], &[3, 7]]),
            "SE2",
        )
        .unwrap()
    }

    #[test]
    fn base_probability_tables() {
        let masses: Vec<f64> = se1().focal().iter().map(|f| f.mass).collect();
        assert_eq!(masses, vec![3.0 / 15.0, 4.0 / 15.0, 7.0 / 15.0, 1.0 / 15.0]);
        let masses: Vec<f64> = se2().focal().iter().map(|f| f.mass).collect();
        assert_eq!(masses, vec![6.0 / 15.0, 6.0 / 15.0, 1.0 / 15.0, 2.0 / 15.0]);
        let vac = base_probability(&grouping(&[&(1..=15).collect::<Vec<_>>(), &[], &[], &[]]), "x")
            .unwrap();
        assert_eq!(vac.focal().len(), 1);
        assert_eq!(vac.focal()[0].mass, 1.0);
        assert_eq!(vac.focal()[0].set, (1..=15).collect::<Vec<_>>());
        assert_eq!(
            base_probability(&grouping(&[&[], &[]]), "x"),
            Err(EvidenceError::EmptyGrouping)
        );
    }

    #[test]
    fn belief_and_plausibility_examples() {
        let m = se1();
        let lower = [1, 2, 3, 4, 5, 7, 8];
        assert_abs_diff_eq!(belief(&m, &lower), 7.0 / 15.0, epsilon = 1e-15);
        assert_abs_diff_eq!(indicator_probability(&m, IndicatorKind::Novelty).unwrap(), 7.0 / 15.0, epsilon = 1e-15);
        let frame: Vec<usize> = (1..=15).collect();
        assert_abs_diff_eq!(belief(&m, &frame), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(plausibility(&m, &frame), 1.0, epsilon = 1e-12);
        assert_eq!(belief(&m, &[]), 0.0);
        assert_eq!(plausibility(&m, &[]), 0.0);
        assert_abs_diff_eq!(plausibility(&m, &[1, 2, 3]), 0.2, epsilon = 1e-15);
    }

    #[test]
    fn conflict_examples() {
        assert_abs_diff_eq!(conflict(&se1(), &se2()).unwrap(), 52.0 / 225.0, epsilon = 1e-15);
        let vac = MassAssignment::vacuous(15, "v");
        assert_eq!(conflict(&se1(), &vac), Ok(0.0));
        let single = MassAssignment::new(4, vec![Focal { set: vec![2], mass: 1.0, interval: None }], "s")
            .unwrap();
        assert_eq!(conflict(&single, &single), Ok(0.0));
        assert!(matches!(
            conflict(&se1(), &MassAssignment::vacuous(4, "v")),
            Err(EvidenceError::FrameMismatch { left: 15, right: 4 })
        ));
    }

    #[test]
    fn combine_worked_example() {
        let r = combine(&se1(), &se2()).unwrap();
        let norm = 173.0;
        let expected = [27.0 / norm, 56.0 / norm, 84.0 / norm, 6.0 / norm];
        for (got, want) in r.interval_masses.iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(r.belief_lower_half, 83.0 / norm, epsilon = 1e-12);
        assert_abs_diff_eq!(r.combined.total_mass(), 1.0, epsilon = 1e-12);
        let lower = [1, 2, 3, 4, 5, 7, 8];
        assert_abs_diff_eq!(belief(&r.combined, &lower), 83.0 / norm, epsilon = 1e-12);
    }

    #[test]
    fn combine_with_vacuous_is_identity() {
        let m = se1();
        let r = combine(&m, &MassAssignment::vacuous(15, "v")).unwrap();
        assert_eq!(r.conflict, 0.0);
        let got: Vec<_> = r.combined.focal().iter().map(|f| (f.set.clone(), f.mass)).collect();
        let mut want: Vec<_> = m.focal().iter().map(|f| (f.set.clone(), f.mass)).collect();
        want.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(got, want);
        assert_eq!(r.interval_masses, m.interval_masses().unwrap());
    }

    #[test]
    fn total_conflict_is_an_error() {
        let a = MassAssignment::new(2, vec![Focal { set: vec![1], mass: 1.0, interval: None }], "a")
            .unwrap();
        let b = MassAssignment::new(2, vec![Focal { set: vec![2], mass: 1.0, interval: None }], "b")
            .unwrap();
        assert_eq!(combine(&a, &b), Err(EvidenceError::TotalConflict));
    }

    #[test]
    fn discount_examples() {
        let m = se2();
        for style in [DiscountStyle::Paper, DiscountStyle::Shafer] {
            assert_eq!(discount(&m, 0.0, style).unwrap(), m);
        }
        let d = discount(&m, 0.2, DiscountStyle::Paper).unwrap();
        assert_abs_diff_eq!(d.total_mass(), 0.8, epsilon = 1e-12);
        let r = combine(&se1(), &d).unwrap();
        assert_abs_diff_eq!(r.conflict, 41.6 / 225.0, epsilon = 1e-12);
        let norm = 183.4;
        let expected = [21.6 / norm, 44.8 / norm, 67.2 / norm, 4.8 / norm];
        for (got, want) in r.interval_masses.iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        let total = discount(&m, 1.0, DiscountStyle::Shafer).unwrap();
        assert_eq!(total.focal().len(), 1);
        assert_eq!(total.focal()[0].set, (1..=15).collect::<Vec<_>>());
        assert_abs_diff_eq!(total.focal()[0].mass, 1.0, epsilon = 1e-15);
        assert_eq!(discount(&m, 1.5, DiscountStyle::Paper), Err(EvidenceError::Alpha(1.5)));
        let shafer = discount(&m, 0.3, DiscountStyle::Shafer).unwrap();
        assert_abs_diff_eq!(shafer.total_mass(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn validation() {
        let f = |set: Vec<usize>, mass| Focal { set, mass, interval: None };
        assert!(matches!(MassAssignment::new(3, vec![f(vec![], 1.0)], "x"), Err(EvidenceError::EmptyFocal { .. })));
        assert!(matches!(MassAssignment::new(3, vec![f(vec![4], 1.0)], "x"), Err(EvidenceError::OutOfFrame { .. })));
        assert!(matches!(MassAssignment::new(3, vec![f(vec![1], 0.0)], "x"), Err(EvidenceError::NonPositiveMass { .. })));
        assert!(matches!(
            MassAssignment::new(3, vec![f(vec![1], 0.6), f(vec![2], 0.6)], "x"),
            Err(EvidenceError::MassOverflow { .. })
        ));
        assert!(matches!(
            MassAssignment::new(3, vec![f(vec![1, 2], 0.5), f(vec![2, 1], 0.5)], "x"),
            Err(EvidenceError::DuplicateFocal { .. })
        ));
    }

    #[test]
    fn json_round_trip_validates() {
        let m = se1();
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains("\"set\":[1,2,3]"));
        let back: MassAssignment = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"frame_size": 2, "focal": [{"set": [3], "mass": 1.0}], "origin": "x"}"#;
        assert!(serde_json::from_str::<MassAssignment>(bad).is_err());
    }
}
