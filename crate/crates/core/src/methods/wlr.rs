//! The weighted log-rank family.
//!
//! All tests here share one engine: over the distinct event times, the
//! score U = Σ w·(d₁ − Y₁·d/Y) accumulates the weighted gap between
//! observed and expected treatment events, with hypergeometric variance
//! V = Σ w²·d·(Y₀Y₁/Y²)·(Y−d)/(Y−1). The standardized statistic U/√V is
//! compared to a standard normal, two sided.
//!
//! The members differ only in the weights: the plain log-rank uses 1, the
//! early and late tests use the left-continuous pooled Kaplan–Meier
//! estimate S(t−) and its complement, and the oracle-weighted variant uses
//! the true log hazard ratio of a known generating design.

use crate::datagen::Sample;
use crate::dist::norm_sf;
use crate::km::{risk_table, KmCurve, RiskRow};
use crate::methods::{Auxiliary, FailureKind, Method, MethodFailure, MethodOutcome, TestResult};
use crate::mixture::TwoArmDesign;

/// Weighted log-rank score and variance over a risk table.
///
/// Rows with a single subject at risk contribute nothing to the variance.
/// Returns `None` when the table is empty or the weighted variance is not
/// positive and finite.
pub fn score_and_variance(rows: &[RiskRow], weights: &[f64]) -> Option<(f64, f64)> {
    assert_eq!(rows.len(), weights.len(), "one weight per event time");
    let mut u = 0.0;
    let mut v = 0.0;
    for (row, &w) in rows.iter().zip(weights) {
        let y = row.y() as f64;
        let d = row.d() as f64;
        u += w * (row.d1 as f64 - row.y1 as f64 * d / y);
        if row.y() > 1 {
            let y0 = row.y0 as f64;
            let y1 = row.y1 as f64;
            v += w * w * d * (y0 * y1 / (y * y)) * ((y - d) / (y - 1.0));
        }
    }
    if v.is_finite() && v > 0.0 && u.is_finite() {
        Some((u, v))
    } else {
        None
    }
}

fn z_test(method: Method, rows: &[RiskRow], weights: &[f64], fallback: bool) -> MethodOutcome {
    if rows.is_empty() {
        return Err(MethodFailure::new(
            method,
            FailureKind::TooFewEvents,
            "no events observed",
        ));
    }
    let Some((u, v)) = score_and_variance(rows, weights) else {
        return Err(MethodFailure::new(
            method,
            FailureKind::DegenerateVariance,
            "weighted score variance is not positive",
        ));
    };
    let z = u / v.sqrt();
    Ok(TestResult {
        method,
        statistic: z,
        p_value: 2.0 * norm_sf(z.abs()),
        df: None,
        auxiliary: Some(Auxiliary::Wlr { score: u, variance: v, unit_weight_fallback: fallback }),
    })
}

/// Standard (unweighted) log-rank test.
pub fn log_rank(sample: &Sample) -> MethodOutcome {
    let rows = risk_table(sample);
    let weights = vec![1.0; rows.len()];
    z_test(Method::Lr, &rows, &weights, false)
}

/// Fleming–Harrington weighted log-rank with weight S(t−)^ρ · (1−S(t−))^γ,
/// where S is the pooled Kaplan–Meier estimate evaluated just before each
/// event time.
pub fn fleming_harrington(
    method: Method,
    sample: &Sample,
    rho: f64,
    gamma: f64,
) -> MethodOutcome {
    let rows = risk_table(sample);
    if rows.is_empty() {
        return Err(MethodFailure::new(method, FailureKind::TooFewEvents, "no events observed"));
    }
    let km = match KmCurve::fit_pooled(sample) {
        Ok(km) => km,
        Err(e) => {
            return Err(MethodFailure::new(method, FailureKind::TooFewEvents, e.to_string()))
        }
    };
    let weights: Vec<f64> = rows
        .iter()
        .map(|r| {
            let s = km.before(r.time);
            pow_weight(s, rho) * pow_weight(1.0 - s, gamma)
        })
        .collect();
    z_test(method, &rows, &weights, false)
}

/// 0^0 = 1 so that a zero exponent always means "ignore this factor".
fn pow_weight(base: f64, exp: f64) -> f64 {
    if exp == 0.0 {
        1.0
    } else {
        base.max(0.0).powf(exp)
    }
}

/// Weighted log-rank emphasizing early survival differences: w = S(t−).
pub fn wlr_early(sample: &Sample) -> MethodOutcome {
    fleming_harrington(Method::WlrEarly, sample, 1.0, 0.0)
}

/// Weighted log-rank emphasizing late survival differences: w = 1 − S(t−).
pub fn wlr_late(sample: &Sample) -> MethodOutcome {
    fleming_harrington(Method::WlrLate, sample, 0.0, 1.0)
}

/// Log-rank weighted by the generating design's true log hazard ratio at
/// each event time. This is an oracle benchmark for simulations: it needs
/// the design that produced the data, so it has no analogue on real data.
///
/// Under a null design every weight would be zero, so the test falls back
/// to unit weights (the plain log-rank) and flags this in its auxiliary
/// output.
pub fn optimal_log_rank(sample: &Sample, design: &TwoArmDesign) -> MethodOutcome {
    let method = Method::OptimalLr;
    let rows = risk_table(sample);
    if rows.is_empty() {
        return Err(MethodFailure::new(method, FailureKind::TooFewEvents, "no events observed"));
    }
    if design.is_null() {
        let weights = vec![1.0; rows.len()];
        return z_test(method, &rows, &weights, true);
    }
    let mut weights = Vec::with_capacity(rows.len());
    for row in &rows {
        match design.log_hazard_ratio(row.time) {
            Some(w) => weights.push(w),
            None => {
                return Err(MethodFailure::new(
                    method,
                    FailureKind::DegenerateVariance,
                    format!("design hazard ratio undefined at event time {}", row.time),
                ));
            }
        }
    }
    z_test(method, &rows, &weights, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Dist;
    use crate::mixture::{CureArm, Effects, UncuredEffect};

    const TOL: f64 = 1e-12;

    /// Ten subjects, events at 1, 2, 4 (both groups), 6, 8.
    fn hand_sample() -> Sample {
        Sample::from_vectors(
            vec![1.0, 2.0, 3.0, 4.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0],
            vec![true, true, false, true, true, false, true, false, true, false],
            vec![0, 1, 0, 0, 1, 1, 1, 0, 1, 0],
        )
        .unwrap()
    }

    #[test]
    fn log_rank_matches_hand_computation() {
        let r = log_rank(&hand_sample()).unwrap();
        let Some(Auxiliary::Wlr { score, variance, unit_weight_fallback }) = r.auxiliary else {
            panic!("missing auxiliary");
        };
        assert!((score - 0.801587301587302).abs() < TOL);
        assert!((variance - 1.405076845553036).abs() < TOL);
        assert!((r.statistic - 0.676239897505241).abs() < TOL);
        assert!((r.p_value - 0.498888345199589).abs() < TOL);
        assert!(!unit_weight_fallback);
        assert_eq!(r.df, None);
    }

    #[test]
    fn early_weights_match_hand_computation() {
        // Weights S(t-) at the five event times: 1, 0.9, 0.8, 4/7, 3/7.
        let r = wlr_early(&hand_sample()).unwrap();
        let Some(Auxiliary::Wlr { score, variance, .. }) = r.auxiliary else {
            panic!("missing auxiliary");
        };
        assert!((score - 2.0 / 7.0).abs() < TOL);
        assert!((variance - 0.838775510204082).abs() < TOL);
    }

    #[test]
    fn late_weights_match_hand_computation() {
        // Weights 1 - S(t-): 0, 0.1, 0.2, 3/7, 4/7.
        let r = wlr_late(&hand_sample()).unwrap();
        let Some(Auxiliary::Wlr { score, variance, .. }) = r.auxiliary else {
            panic!("missing auxiliary");
        };
        assert!((score - 65.0 / 126.0).abs() < TOL);
        assert!((variance - 0.146346686822877).abs() < TOL);
    }

    #[test]
    fn swapping_groups_flips_the_sign() {
        let s = hand_sample();
        let swapped = s.with_groups_swapped();
        for f in [log_rank, wlr_early, wlr_late] {
            let a = f(&s).unwrap();
            let b = f(&swapped).unwrap();
            assert!((a.statistic + b.statistic).abs() < TOL);
            assert!((a.p_value - b.p_value).abs() < TOL);
        }
    }

    #[test]
    fn no_events_is_a_failure_not_an_error() {
        let s = Sample::from_vectors(
            vec![1.0, 2.0],
            vec![false, false],
            vec![0, 1],
        )
        .unwrap();
        let err = log_rank(&s).unwrap_err();
        assert_eq!(err.kind, FailureKind::TooFewEvents);
    }

    #[test]
    fn single_subject_rows_contribute_no_variance() {
        // Only one subject remains at the last event time: variance must
        // come entirely from the first event.
        let s = Sample::from_vectors(
            vec![1.0, 1.0, 2.0],
            vec![true, false, true],
            vec![0, 1, 1],
        )
        .unwrap();
        let r = log_rank(&s).unwrap();
        let Some(Auxiliary::Wlr { variance, .. }) = r.auxiliary else {
            panic!("missing auxiliary");
        };
        // t=1: d=1, Y0=1, Y1=2, Y=3: v = (2/9)*(2/2) = 2/9.
        assert!((variance - 2.0 / 9.0).abs() < TOL);
    }

    #[test]
    fn events_in_one_group_only_still_tests() {
        let s = Sample::from_vectors(
            vec![1.0, 2.0, 3.0, 4.0],
            vec![true, true, false, false],
            vec![0, 0, 1, 1],
        )
        .unwrap();
        let r = log_rank(&s).unwrap();
        assert!(r.statistic < 0.0);
        assert!(r.p_value > 0.0 && r.p_value < 1.0);
    }

    #[test]
    fn optimal_weights_come_from_the_design() {
        let control = CureArm::new(0.3, Dist::weibull(2.0, 1.0).unwrap()).unwrap();
        let design = TwoArmDesign::from_effects(
            control,
            &Effects {
                cure_odds_ratio: 1.0,
                uncured: UncuredEffect::HazardRatio(0.5),
                treatment_cure: None,
            },
        )
        .unwrap();
        let s = hand_sample();
        let r = optimal_log_rank(&s, &design).unwrap();
        let Some(Auxiliary::Wlr { score, unit_weight_fallback, .. }) = r.auxiliary else {
            panic!("missing auxiliary");
        };
        assert!(!unit_weight_fallback);
        // Manual recomputation of the weighted score.
        let rows = risk_table(&s);
        let mut want = 0.0;
        for row in &rows {
            let w = design.log_hazard_ratio(row.time).unwrap();
            let y = row.y() as f64;
            want += w * (row.d1 as f64 - row.y1 as f64 * row.d() as f64 / y);
        }
        assert!((score - want).abs() < TOL);
        // The mixture hazards cross: the treated arm's uncured pool
        // depletes later, so its hazard is lower early and higher late.
        assert!(design.log_hazard_ratio(1.0).unwrap() < 0.0);
        assert!(design.log_hazard_ratio(2.0).unwrap() > 0.0);
        assert!(design.log_hazard_ratio(4.0).unwrap() > 0.0);
    }

    #[test]
    fn null_design_falls_back_to_unit_weights() {
        let control = CureArm::new(0.3, Dist::weibull(2.0, 1.0).unwrap()).unwrap();
        let design = TwoArmDesign::from_effects(control, &Effects::null()).unwrap();
        let s = hand_sample();
        let opt = optimal_log_rank(&s, &design).unwrap();
        let lr = log_rank(&s).unwrap();
        assert!((opt.statistic - lr.statistic).abs() < TOL);
        assert!((opt.p_value - lr.p_value).abs() < TOL);
        let Some(Auxiliary::Wlr { unit_weight_fallback, .. }) = opt.auxiliary else {
            panic!("missing auxiliary");
        };
        assert!(unit_weight_fallback);
    }

    #[test]
    fn zero_weights_everywhere_degenerate() {
        let rows = risk_table(&hand_sample());
        let weights = vec![0.0; rows.len()];
        assert!(score_and_variance(&rows, &weights).is_none());
    }
}
