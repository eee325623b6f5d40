//! Adaptive two-sample test built on the short/long-term hazard ratio
//! model of Yang and Prentice.
//!
//! The model lets the hazard ratio travel from a short-term value θ₁ at
//! time zero to a long-term value θ₂ as the baseline survival S₀ drops
//! from 1 to 0:
//!
//! ```text
//! h(t) = θ₁θ₂ / (θ₁·(1 − S₀(t)) + θ₂·S₀(t))
//! ```
//!
//! Proportional (θ₁ = θ₂), purely early, purely late, and crossing hazard
//! alternatives are all inside the family, which is what makes the
//! likelihood ratio test against θ₁ = θ₂ = 1 adaptive.
//!
//! The baseline is profiled out: for a candidate (β₁, β₂) = (ln θ₁, ln θ₂)
//! the Breslow-type baseline fixed point is iterated until stable, and the
//! pseudo partial log-likelihood is evaluated there. Because the relative
//! risk depends on a subject only through its group, each event time's
//! denominator reduces to Y₀ + Y₁·h(t), so one evaluation is linear in the
//! number of event times. Twice the profiled likelihood gap to the null is
//! treated as chi-square with 2 degrees of freedom.

use std::cell::RefCell;

use crate::datagen::Sample;
use crate::km::{risk_table, RiskRow};
use crate::methods::{Auxiliary, FailureKind, Method, MethodFailure, MethodOutcome, TestResult};
use crate::optim::nelder_mead;

const BETA_CLAMP: f64 = 15.0;
const FIXED_POINT_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 200;
const NM_EVALS: usize = 500;

struct Engine<'a> {
    rows: &'a [RiskRow],
    /// Baseline survival just before each event time, reused across
    /// objective evaluations as a warm start.
    cache: RefCell<Vec<f64>>,
}

impl<'a> Engine<'a> {
    fn new(rows: &'a [RiskRow]) -> Self {
        // Seed with the pooled Kaplan-Meier left-limits.
        let mut s = Vec::with_capacity(rows.len());
        let mut cur = 1.0;
        for row in rows {
            s.push(cur);
            cur *= 1.0 - row.d() as f64 / row.y() as f64;
        }
        Engine { rows, cache: RefCell::new(s) }
    }

    fn hazard_ratio(th1: f64, th2: f64, s0: f64) -> f64 {
        th1 * th2 / (th1 * (1.0 - s0) + th2 * s0)
    }

    /// Profiled negative pseudo partial log-likelihood at (β₁, β₂).
    fn neg_logpl(&self, beta: &[f64]) -> f64 {
        if beta.iter().any(|b| b.abs() > BETA_CLAMP) {
            return f64::INFINITY;
        }
        let (th1, th2) = (beta[0].exp(), beta[1].exp());
        let mut s = self.cache.borrow().clone();

        // The relative risk is constant in time when θ₁ = θ₂, so the
        // baseline drops out of the likelihood and one sweep suffices.
        let sweeps = if beta[0] == beta[1] { 1 } else { MAX_SWEEPS };
        for _ in 0..sweeps {
            let mut cum = 0.0f64;
            let mut diff = 0.0f64;
            for (i, row) in self.rows.iter().enumerate() {
                let new_s = (-cum).exp();
                diff = diff.max((new_s - s[i]).abs());
                s[i] = new_s;
                let h = Self::hazard_ratio(th1, th2, s[i]);
                cum += row.d() as f64 / (row.y0 as f64 + row.y1 as f64 * h);
            }
            if diff < FIXED_POINT_TOL {
                break;
            }
        }
        self.cache.replace(s.clone());

        let mut lp = 0.0;
        for (row, &s0) in self.rows.iter().zip(&s) {
            let h = Self::hazard_ratio(th1, th2, s0);
            let denom = row.y0 as f64 + row.y1 as f64 * h;
            lp += row.d1 as f64 * h.ln() - row.d() as f64 * denom.ln();
        }
        if lp.is_finite() {
            -lp
        } else {
            f64::INFINITY
        }
    }
}

/// Runs the adaptive short/long-term hazard ratio test.
pub fn yp_test(sample: &Sample) -> MethodOutcome {
    let method = Method::Yp;
    for g in [0u8, 1] {
        let events = sample.n_events_in(g);
        if events < 2 {
            return Err(MethodFailure::new(
                method,
                FailureKind::TooFewEvents,
                format!("group {g} has {events} events, needs 2"),
            ));
        }
    }
    let rows = risk_table(sample);
    let engine = Engine::new(&rows);
    let f = |b: &[f64]| engine.neg_logpl(b);

    let null_value = f(&[0.0, 0.0]);
    if !null_value.is_finite() {
        return Err(MethodFailure::new(
            method,
            FailureKind::DegenerateVariance,
            "pseudo likelihood undefined at the null",
        ));
    }

    let starts: [[f64; 2]; 3] = [[0.0, 0.0], [-0.7, 0.7], [0.7, -0.7]];
    let mut best: Option<(f64, Vec<f64>, bool)> = None;
    for start in &starts {
        let r = nelder_mead(&f, start, 0.5, NM_EVALS);
        let cand = (r.f, r.x, r.converged);
        best = Some(match best.take() {
            None => cand,
            Some(b) => {
                if cand.0 < b.0 {
                    cand
                } else {
                    b
                }
            }
        });
    }
    let (best_value, beta, _) = best.expect("at least one start");
    if !best_value.is_finite() {
        return Err(MethodFailure::new(
            method,
            FailureKind::NonConvergence,
            "profiled likelihood optimization failed from every start",
        ));
    }
    // Heavy censoring leaves the long-term ratio weakly identified: the
    // profiled likelihood flattens into a ridge as |β| grows, because the
    // within-window hazard ratio tends to θ₁/S₀(t). The likelihood value
    // still converges along the ridge, so the statistic is sound even when
    // the maximizer drifts; nothing here is a failure.

    let lambda = (2.0 * (null_value - best_value)).max(0.0);
    Ok(TestResult {
        method,
        statistic: lambda,
        p_value: (-lambda / 2.0).exp(),
        df: Some(2),
        auxiliary: Some(Auxiliary::Yp { beta_short: beta[0], beta_long: beta[1] }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::generate_trial;
    use crate::dist::Dist;
    use crate::followup::FollowUp;
    use crate::mixture::{CureArm, Effects, TwoArmDesign, UncuredEffect};
    use crate::seeding::{hash_str, replicate_rng, LANE_DATA};

    fn hand_sample() -> Sample {
        Sample::from_vectors(
            vec![1.0, 2.0, 3.0, 4.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0],
            vec![true, true, false, true, true, false, true, false, true, false],
            vec![0, 1, 0, 0, 1, 1, 1, 0, 1, 0],
        )
        .unwrap()
    }

    #[test]
    fn null_value_is_sum_of_log_risk_sizes() {
        let s = hand_sample();
        let rows = risk_table(&s);
        let engine = Engine::new(&rows);
        let got = engine.neg_logpl(&[0.0, 0.0]);
        let want: f64 = rows.iter().map(|r| r.d() as f64 * (r.y() as f64).ln()).sum();
        assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
    }

    #[test]
    fn equal_ratios_collapse_to_proportional_hazards() {
        // With β₁ = β₂ = b the relative risk is e^b at every time, so the
        // objective must equal the Cox-Breslow partial likelihood, which
        // we can write down directly from the risk table.
        let s = hand_sample();
        let rows = risk_table(&s);
        let engine = Engine::new(&rows);
        for b in [-0.8, -0.3, 0.5, 1.2] {
            let got = engine.neg_logpl(&[b, b]);
            let want: f64 = rows
                .iter()
                .map(|r| {
                    r.d() as f64 * (r.y0 as f64 + r.y1 as f64 * b.exp()).ln()
                        - r.d1 as f64 * b
                })
                .sum();
            assert!((got - want).abs() < 1e-10, "b={b}: got {got}, want {want}");
        }
    }

    #[test]
    fn baseline_fixed_point_is_warm_start_independent() {
        let s = hand_sample();
        let rows = risk_table(&s);
        let beta = [0.6, -0.9];
        let cold = Engine::new(&rows).neg_logpl(&beta);
        let warm_engine = Engine::new(&rows);
        warm_engine.neg_logpl(&[-1.0, 1.0]);
        warm_engine.neg_logpl(&[0.2, 0.4]);
        let warm = warm_engine.neg_logpl(&beta);
        assert!((cold - warm).abs() < 1e-8, "cold {cold}, warm {warm}");
    }

    fn trial(seed: u64, n: usize, effects: &Effects) -> Sample {
        let control = CureArm::new(0.3, Dist::weibull(2.0, 1.0).unwrap()).unwrap();
        let design = TwoArmDesign::from_effects(control, effects).unwrap();
        let fu = FollowUp::from_quantile(design.control(), 0.99).unwrap();
        let mut rng = replicate_rng(seed, hash_str("yp-test"), 0, LANE_DATA);
        generate_trial(&design, &fu, n, &mut rng).unwrap()
    }

    #[test]
    fn null_data_gives_unremarkable_p() {
        let sample = trial(4, 150, &Effects::null());
        let r = yp_test(&sample).unwrap();
        assert_eq!(r.df, Some(2));
        assert!(r.statistic >= 0.0);
        assert!((r.p_value - (-r.statistic / 2.0).exp()).abs() < 1e-12);
        assert!(r.p_value > 0.01, "p {}", r.p_value);
    }

    #[test]
    fn detects_a_cure_difference() {
        let effects = Effects {
            cure_odds_ratio: 3.5,
            uncured: UncuredEffect::None,
            treatment_cure: None,
        };
        let sample = trial(8, 400, &effects);
        let r = yp_test(&sample).unwrap();
        assert!(r.p_value < 0.01, "p {}", r.p_value);
        let Some(Auxiliary::Yp { beta_long, .. }) = r.auxiliary else { panic!("aux") };
        // More cures in the treated arm pull the long-term ratio down.
        assert!(beta_long < 0.0, "beta_long {beta_long}");
    }

    #[test]
    fn group_exchange_is_nearly_symmetric() {
        // The profiled baseline is anchored to one arm's labeling, so
        // exchanging groups reproduces the statistic only approximately.
        let sample = trial(12, 200, &Effects {
            cure_odds_ratio: 2.0,
            uncured: UncuredEffect::HazardRatio(0.7),
            treatment_cure: None,
        });
        let a = yp_test(&sample).unwrap();
        let b = yp_test(&sample.with_groups_swapped()).unwrap();
        assert!(
            (a.p_value - b.p_value).abs() < 0.05,
            "p {} vs swapped {}",
            a.p_value,
            b.p_value
        );
    }

    #[test]
    fn repeat_runs_are_identical() {
        let sample = trial(2, 120, &Effects::null());
        let a = yp_test(&sample).unwrap();
        let b = yp_test(&sample).unwrap();
        assert_eq!(a.statistic.to_bits(), b.statistic.to_bits());
        assert_eq!(a.p_value.to_bits(), b.p_value.to_bits());
    }

    #[test]
    fn sparse_group_is_a_failure() {
        let sample = Sample::from_vectors(
            vec![1.0, 2.0, 3.0, 4.0, 5.0],
            vec![true, true, true, true, false],
            vec![0, 0, 0, 0, 1],
        )
        .unwrap();
        let err = yp_test(&sample).unwrap_err();
        assert_eq!(err.kind, FailureKind::TooFewEvents);
    }
}
