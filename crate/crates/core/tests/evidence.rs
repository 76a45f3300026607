use approx::assert_abs_diff_eq;
use innometer::evidence::{
    base_probability, belief, combine, conflict, discount, plausibility, DiscountStyle,
    EvidenceError, Focal,
};
use innometer::indicators::IntervalGrouping;
use innometer::{IndicatorKind, MassAssignment};
use proptest::prelude::*;

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

fn mask(set: &[usize]) -> usize {
    set.iter().fold(0, |m, &i| m | 1 << (i - 1))
}

fn dense(m: &MassAssignment) -> Vec<f64> {
    let mut out = vec![0.0; 1 << m.frame_size()];
    for f in m.focal() {
        out[mask(&f.set)] += f.mass;
    }
    out
}

/// Dempster's rule over the whole power set, one subset pair at a time.
fn oracle(m1: &[f64], m2: &[f64]) -> (f64, Vec<f64>) {
    let mut joint = vec![0.0; m1.len()];
    let mut k = 0.0;
    for (a, &x) in m1.iter().enumerate() {
        for (b, &y) in m2.iter().enumerate() {
            if a & b == 0 {
                k += x * y;
            } else {
                joint[a & b] += x * y;
            }
        }
    }
    (k, joint.iter().map(|v| v / (1.0 - k)).collect())
}

/// Frame size and two lists of (subset bitmask, weight).
type RawPair = (usize, Vec<(usize, f64)>, Vec<(usize, f64)>);

fn assignment() -> impl Strategy<Value = RawPair> {
    (1usize..=8).prop_flat_map(|n| {
        let side = || {
            prop::collection::btree_map(1usize..(1 << n), 0.05f64..1.0, 1..=4)
                .prop_map(|m| m.into_iter().collect::<Vec<_>>())
        };
        (Just(n), side(), side())
    })
}

fn build(n: usize, raw: &[(usize, f64)]) -> MassAssignment {
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    let focal = raw
        .iter()
        .map(|&(m, w)| Focal {
            set: (1..=n).filter(|i| m >> (i - 1) & 1 == 1).collect(),
            mass: w / total,
            interval: None,
        })
        .collect();
    MassAssignment::new(n, focal, "random").unwrap()
}

proptest! {
    #[test]
    fn combine_matches_power_set_oracle((n, a, b) in assignment()) {
        let (m1, m2) = (build(n, &a), build(n, &b));
        let (k, joint) = oracle(&dense(&m1), &dense(&m2));
        prop_assert!((conflict(&m1, &m2).unwrap() - k).abs() < 1e-12);
        match combine(&m1, &m2) {
            Ok(r) => {
                let got = dense(&r.combined);
                for (g, w) in got.iter().zip(&joint) {
                    prop_assert!((g - w).abs() < 1e-12);
                }
            }
            Err(EvidenceError::TotalConflict) => prop_assert!(1.0 - k < 1e-9),
            Err(e) => prop_assert!(false, "unexpected {e}"),
        }
    }

    #[test]
    fn belief_bounded_by_plausibility((n, a, _b) in assignment(), set in 0usize..256) {
        let m = build(n, &a);
        let set: Vec<usize> = (1..=n).filter(|i| set >> (i - 1) & 1 == 1).collect();
        let (bel, pl) = (belief(&m, &set), plausibility(&m, &set));
        prop_assert!(bel <= pl + 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&bel));
        prop_assert!((0.0..=1.0 + 1e-12).contains(&pl));
    }

    #[test]
    fn combination_is_commutative((n, a, b) in assignment()) {
        let (m1, m2) = (build(n, &a), build(n, &b));
        if let (Ok(x), Ok(y)) = (combine(&m1, &m2), combine(&m2, &m1)) {
            for (p, q) in dense(&x.combined).iter().zip(dense(&y.combined)) {
                prop_assert!((p - q).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn discounting_scales_every_focal(alpha in 0.0f64..=1.0) {
        let m = se2();
        let d = discount(&m, alpha, DiscountStyle::Paper).unwrap();
        prop_assert!((d.total_mass() - (1.0 - alpha)).abs() < 1e-12);
        let s = discount(&m, alpha, DiscountStyle::Shafer).unwrap();
        prop_assert!((s.total_mass() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn single_source_tables() {
    let expected_1 = [0.20, 0.27, 0.46, 0.07];
    for (got, want) in se1().interval_masses().unwrap().iter().zip(expected_1) {
        assert!((got - want).abs() <= 0.01, "{got} vs {want}");
    }
    let p1 = innometer::evidence::indicator_probability(&se1(), IndicatorKind::Novelty).unwrap();
    assert_abs_diff_eq!(p1, 0.47, epsilon = 0.01);
    let expected_2 = [0.40, 0.40, 0.07, 0.13];
    for (got, want) in se2().interval_masses().unwrap().iter().zip(expected_2) {
        assert!((got - want).abs() <= 0.01, "{got} vs {want}");
    }
    let p2 = innometer::evidence::indicator_probability(&se2(), IndicatorKind::Novelty).unwrap();
    assert_abs_diff_eq!(p2, 0.80, epsilon = 0.01);
}

#[test]
fn fused_table() {
    let r = combine(&se1(), &se2()).unwrap();
    assert_abs_diff_eq!(r.conflict, 0.2311, epsilon = 0.005);
    for (got, want) in r.interval_masses.iter().zip([0.15, 0.33, 0.48, 0.04]) {
        assert!((got - want).abs() <= 0.01, "{got} vs {want}");
    }
    assert_abs_diff_eq!(r.probability(IndicatorKind::Novelty), 0.48, epsilon = 0.01);
}

#[test]
fn discounted_fusion() {
    let m1 = discount(&se1(), 0.0, DiscountStyle::Paper).unwrap();
    let m2 = discount(&se2(), 0.2, DiscountStyle::Paper).unwrap();
    let r = combine(&m1, &m2).unwrap();
    // 52/225 of conflict with SE2 scaled by 0.8, plus nothing from the dropped 0.2
    assert_abs_diff_eq!(r.conflict, 0.8 * 52.0 / 225.0, epsilon = 1e-12);
    assert_abs_diff_eq!(r.conflict, 0.185, epsilon = 0.005);
    for (got, want) in r.interval_masses.iter().zip([0.12, 0.25, 0.36, 0.03]) {
        assert!((got - want).abs() <= 0.01, "{got} vs {want}");
    }
    assert_abs_diff_eq!(r.probability(IndicatorKind::Novelty), 0.37, epsilon = 0.012);
}

#[test]
fn vacuous_partner_leaves_probability_unchanged() {
    let vac = MassAssignment::vacuous(15, "none");
    let r = combine(&se1(), &vac).unwrap();
    assert_eq!(r.conflict, 0.0);
    assert_abs_diff_eq!(r.probability(IndicatorKind::Novelty), 7.0 / 15.0, epsilon = 1e-12);
}
