//! Risk tables and the Kaplan–Meier estimator.
//!
//! Ties follow the usual convention: at an observed time, events are
//! processed before censorings, so a subject censored at t still counts as
//! at risk for events occurring at t.

use crate::datagen::Sample;
use crate::error::{Error, Result};

/// Per-group event and at-risk counts at one distinct event time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiskRow {
    pub time: f64,
    /// Events in the control (0) and treatment (1) groups at this time.
    pub d0: usize,
    pub d1: usize,
    /// Subjects at risk (observed time ≥ this time) per group.
    pub y0: usize,
    pub y1: usize,
}

impl RiskRow {
    pub fn d(&self) -> usize {
        self.d0 + self.d1
    }

    pub fn y(&self) -> usize {
        self.y0 + self.y1
    }
}

/// Builds the two-group risk table over the distinct event times, ascending.
/// Times with censorings only do not get a row.
pub fn risk_table(sample: &Sample) -> Vec<RiskRow> {
    let n = sample.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        sample.time[a]
            .partial_cmp(&sample.time[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut rows = Vec::new();
    let mut at_risk = [0usize; 2];
    for &i in &order {
        at_risk[sample.group[i] as usize] += 1;
    }
    // `at_risk` currently counts everyone; walk forward removing subjects
    // after their time passes.
    let mut pos = 0;
    while pos < n {
        let t = sample.time[order[pos]];
        let mut d = [0usize; 2];
        let mut leaving = [0usize; 2];
        let mut end = pos;
        while end < n && sample.time[order[end]] == t {
            let idx = order[end];
            let g = sample.group[idx] as usize;
            if sample.event[idx] {
                d[g] += 1;
            }
            leaving[g] += 1;
            end += 1;
        }
        if d[0] + d[1] > 0 {
            rows.push(RiskRow { time: t, d0: d[0], d1: d[1], y0: at_risk[0], y1: at_risk[1] });
        }
        at_risk[0] -= leaving[0];
        at_risk[1] -= leaving[1];
        pos = end;
    }
    rows
}

/// Kaplan–Meier survival curve as a right-continuous step function.
#[derive(Clone, Debug, PartialEq)]
pub struct KmCurve {
    /// Distinct event times, ascending.
    times: Vec<f64>,
    /// Survival estimate just after each event time.
    surv: Vec<f64>,
}

impl KmCurve {
    /// Product-limit estimate from one set of observations.
    pub fn fit(time: &[f64], event: &[bool]) -> Result<Self> {
        if time.is_empty() || time.len() != event.len() {
            return Err(Error::InvalidData(
                "Kaplan-Meier needs equal-length, non-empty time and event vectors".into(),
            ));
        }
        let mut order: Vec<usize> = (0..time.len()).collect();
        order.sort_by(|&a, &b| {
            time[a].partial_cmp(&time[b]).unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut times = Vec::new();
        let mut surv = Vec::new();
        let mut s = 1.0;
        let mut at_risk = time.len();
        let mut pos = 0;
        while pos < time.len() {
            let t = time[order[pos]];
            let mut d = 0usize;
            let mut leaving = 0usize;
            let mut end = pos;
            while end < time.len() && time[order[end]] == t {
                if event[order[end]] {
                    d += 1;
                }
                leaving += 1;
                end += 1;
            }
            if d > 0 {
                s *= 1.0 - d as f64 / at_risk as f64;
                times.push(t);
                surv.push(s);
            }
            at_risk -= leaving;
            pos = end;
        }
        Ok(KmCurve { times, surv })
    }

    /// Pooled curve over both groups of a sample.
    pub fn fit_pooled(sample: &Sample) -> Result<Self> {
        KmCurve::fit(&sample.time, &sample.event)
    }

    /// Curve for one group of a sample.
    pub fn fit_group(sample: &Sample, group: u8) -> Result<Self> {
        let (t, e) = sample.arm(group);
        KmCurve::fit(&t, &e)
    }

    /// S(t): right-continuous lookup.
    pub fn at(&self, t: f64) -> f64 {
        let idx = self.times.partition_point(|&x| x <= t);
        if idx == 0 {
            1.0
        } else {
            self.surv[idx - 1]
        }
    }

    /// S(t−): left-continuous lookup, i.e. the value just before t. Equal to
    /// 1 at and before the first event time.
    pub fn before(&self, t: f64) -> f64 {
        let idx = self.times.partition_point(|&x| x < t);
        if idx == 0 {
            1.0
        } else {
            self.surv[idx - 1]
        }
    }

    pub fn event_times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.surv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn km_without_censoring_is_empirical_survival() {
        let time = [1.0, 2.0, 3.0, 4.0, 5.0];
        let event = [true; 5];
        let km = KmCurve::fit(&time, &event).unwrap();
        for (t, want) in [(1.0, 0.8), (2.0, 0.6), (3.0, 0.4), (4.0, 0.2), (5.0, 0.0)] {
            assert!((km.at(t) - want).abs() < TOL, "t={t}");
        }
        assert!((km.at(0.5) - 1.0).abs() < TOL);
    }

    #[test]
    fn km_with_censoring_hand_computed() {
        // Events at 1 and 3, censor at 2:
        // S(1) = 2/3, S(3) = 2/3 * (1 - 1/1) = 0.
        let time = [1.0, 2.0, 3.0];
        let event = [true, false, true];
        let km = KmCurve::fit(&time, &event).unwrap();
        assert!((km.at(1.0) - 2.0 / 3.0).abs() < TOL);
        assert!((km.at(2.5) - 2.0 / 3.0).abs() < TOL);
        assert!((km.at(3.0) - 0.0).abs() < TOL);
        // Left-continuous lookups.
        assert!((km.before(1.0) - 1.0).abs() < TOL);
        assert!((km.before(3.0) - 2.0 / 3.0).abs() < TOL);
    }

    #[test]
    fn tied_event_and_censoring_keep_subject_at_risk() {
        // At t=2 the censored subject still counts as at risk.
        let time = [2.0, 2.0, 2.0, 5.0];
        let event = [true, false, true, true];
        let km = KmCurve::fit(&time, &event).unwrap();
        // d=2, Y=4 at t=2: S = 1/2. Then d=1, Y=1 at t=5: S = 0.
        assert!((km.at(2.0) - 0.5).abs() < TOL);
        assert!((km.at(5.0) - 0.0).abs() < TOL);
    }

    #[test]
    fn risk_table_counts_by_group() {
        let s = Sample::from_vectors(
            vec![2.0, 2.0, 2.0, 5.0],
            vec![true, false, true, true],
            vec![0, 1, 1, 1],
        )
        .unwrap();
        let rows = risk_table(&s);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0], RiskRow { time: 2.0, d0: 1, d1: 1, y0: 1, y1: 3 });
        assert_eq!(rows[1], RiskRow { time: 5.0, d0: 0, d1: 1, y0: 0, y1: 1 });
    }

    #[test]
    fn censor_only_times_get_no_row() {
        let s = Sample::from_vectors(
            vec![1.0, 2.0, 3.0],
            vec![true, false, true],
            vec![0, 0, 1],
        )
        .unwrap();
        let rows = risk_table(&s);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].time, 1.0);
        assert_eq!(rows[1].time, 3.0);
        assert_eq!(rows[1].y0, 0);
        assert_eq!(rows[1].y1, 1);
    }

    #[test]
    fn pooled_km_ignores_group_labels() {
        let s = Sample::from_vectors(
            vec![1.0, 2.0, 3.0, 4.0],
            vec![true, true, false, true],
            vec![0, 1, 0, 1],
        )
        .unwrap();
        let a = KmCurve::fit_pooled(&s).unwrap();
        let b = KmCurve::fit_pooled(&s.with_groups_swapped()).unwrap();
        assert_eq!(a, b);
    }
}
