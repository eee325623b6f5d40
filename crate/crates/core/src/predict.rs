//! Numerical prediction of the log-rank power-curve shape over follow-up.
//!
//! The driver is the weighted average hazard difference
//!
//! ```text
//! A(τ) = ∫₀^τ w(t)·(h₁(t) − h₀(t)) dt,   w(t) = G(t)·2S₀S₁/(S₀+S₁)
//! ```
//!
//! with mixture survival and hazard functions per arm and G the censoring
//! survival function. A is normalized per subject per arm: under balanced
//! allocation with n subjects per arm the expected unweighted log-rank
//! score is E{U(τ)} = (n/2)·A(τ). Where |A| grows with τ the log-rank test
//! gains power from longer follow-up; an interior extremum of |A| predicts
//! a power peak, and more follow-up hurts beyond it.
//!
//! Profiles are evaluated cumulatively on a dense grid of follow-up times
//! placed at equal control-uncured quantile increments, each panel by
//! adaptive Gauss–Kronrod quadrature. The quadrature nodes are interior,
//! so integrable hazard singularities at zero (Weibull shape < 1) need no
//! special casing.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::TwoArmDesign;
use crate::quad::integrate;

/// Tolerance for each cumulative quadrature panel.
const PANEL_TOL: f64 = 1e-8;
/// Slack allowed when testing the profile for monotonicity.
const MONOTONE_TOL: f64 = 1e-9;

/// Distribution of the censoring time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CensoringLaw {
    /// No censoring: G ≡ 1.
    None,
    /// Uniform on [tau_start, tau_end]: G is 1 before tau_start, falls
    /// linearly, and is 0 from tau_end on. This is the law induced by
    /// uniform accrual with an administrative cutoff.
    Uniform { tau_start: f64, tau_end: f64 },
}

impl CensoringLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CensoringLaw::None => Ok(()),
            CensoringLaw::Uniform { tau_start, tau_end } => {
                if tau_start >= 0.0 && tau_end > tau_start && tau_end.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(format!(
                        "uniform censoring needs 0 <= start < end, got [{tau_start}, {tau_end}]"
                    )))
                }
            }
        }
    }

    /// G(t) = P(censoring time > t).
    pub fn survival(&self, t: f64) -> f64 {
        match *self {
            CensoringLaw::None => 1.0,
            CensoringLaw::Uniform { tau_start, tau_end } => {
                if t <= tau_start {
                    1.0
                } else if t >= tau_end {
                    0.0
                } else {
                    (tau_end - t) / (tau_end - tau_start)
                }
            }
        }
    }
}

/// The integrand weight w(t) = G(t)·2S₀S₁/(S₀+S₁).
pub fn weight(design: &TwoArmDesign, cens: &CensoringLaw, t: f64) -> f64 {
    weight_with(design, |x| cens.survival(x), t)
}

/// Same weight with an arbitrary censoring survival function.
pub fn weight_with<G: Fn(f64) -> f64>(design: &TwoArmDesign, g: G, t: f64) -> f64 {
    let s0 = design.control().survival(t);
    let s1 = design.treatment().survival(t);
    if s0 + s1 == 0.0 {
        return 0.0;
    }
    g(t) * 2.0 * s0 * s1 / (s0 + s1)
}

/// How to lay out the τ grid of a profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Base grid size; actual profiles may carry a few more rows after
    /// extension toward `tau_end`.
    pub points: usize,
    /// Last follow-up time of the profile.
    pub tau_end: f64,
}

impl GridSpec {
    /// Default-resolution grid ending at `tau_end`.
    pub fn to(tau_end: f64) -> Self {
        GridSpec { points: 400, tau_end }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::InvalidConfig("profile grid needs at least 2 points".into()));
        }
        if !(self.tau_end > 0.0 && self.tau_end.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "profile grid end must be positive and finite, got {}",
                self.tau_end
            )));
        }
        Ok(())
    }
}

/// One grid point of a profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AProfileRow {
    pub tau: f64,
    /// Control-arm uncured quantile level of `tau`.
    pub quantile_level: f64,
    pub a: f64,
    /// Cumulative hazard contrast H₁(τ) − H₀(τ) between the arms.
    pub delta_h: f64,
}

/// Shape of A over the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Monotone,
    NonMonotone,
}

/// Location and value of the extreme |A| over the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub tau: f64,
    pub quantile_level: f64,
    pub a: f64,
}

/// A(τ) over a follow-up grid, with its monotonicity classification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AProfile {
    pub rows: Vec<AProfileRow>,
    pub classification: Shape,
    pub extremum: Extremum,
}

fn classify(rows: &[AProfileRow]) -> (Shape, Extremum) {
    let non_increasing = rows.windows(2).all(|w| w[1].a <= w[0].a + MONOTONE_TOL);
    let non_decreasing = rows.windows(2).all(|w| w[1].a >= w[0].a - MONOTONE_TOL);
    let shape = if non_increasing || non_decreasing { Shape::Monotone } else { Shape::NonMonotone };
    let mut ext = &rows[0];
    for row in rows {
        if row.a.abs() > ext.a.abs() {
            ext = row;
        }
    }
    (shape, Extremum { tau: ext.tau, quantile_level: ext.quantile_level, a: ext.a })
}

/// Builds the τ grid: control-uncured quantiles at equal level increments
/// from 0.001 to 0.9999, capped at `tau_end` and extended toward it with
/// comparable spacing when the quantile range falls short. Always ends
/// exactly at `tau_end`.
fn build_grid(design: &TwoArmDesign, spec: &GridSpec) -> Result<Vec<f64>> {
    let control = design.control();
    let lo = 0.001;
    let hi = 0.9999;
    let mut taus: Vec<f64> = Vec::with_capacity(spec.points + 8);
    for i in 0..spec.points {
        let p = lo + (hi - lo) * i as f64 / (spec.points - 1) as f64;
        let t = control.uncured_quantile(p)?;
        if t < spec.tau_end {
            taus.push(t);
        } else {
            break;
        }
    }
    if taus.is_empty() {
        // The grid end sits below the smallest base quantile; fall back to
        // a uniform grid.
        let n = spec.points.min(100);
        for i in 1..=n {
            taus.push(spec.tau_end * i as f64 / n as f64);
        }
        return Ok(taus);
    }
    let last = *taus.last().expect("non-empty");
    let gap = spec.tau_end - last;
    if gap > 0.0 {
        // Continue at the spacing of the base grid's tail.
        let tail_from = taus.len().saturating_sub(11);
        let tail_span = last - taus[tail_from];
        let tail_step = (tail_span / (taus.len() - 1 - tail_from).max(1) as f64).max(1e-12);
        let n_ext = ((gap / tail_step).ceil() as usize).clamp(1, 150);
        for i in 1..=n_ext {
            taus.push(last + gap * i as f64 / n_ext as f64);
        }
    }
    Ok(taus)
}

/// Computes the A profile for a design under a censoring law.
pub fn compute_a_profile(
    design: &TwoArmDesign,
    cens: &CensoringLaw,
    spec: &GridSpec,
) -> Result<AProfile> {
    cens.validate()?;
    compute_a_profile_with(design, |t| cens.survival(t), spec)
}

/// Computes the A profile with an arbitrary censoring survival function.
pub fn compute_a_profile_with<G: Fn(f64) -> f64>(
    design: &TwoArmDesign,
    g: G,
    spec: &GridSpec,
) -> Result<AProfile> {
    spec.validate()?;
    let taus = build_grid(design, spec)?;
    let integrand = |t: f64| {
        let h0 = design.control().hazard(t);
        let h1 = design.treatment().hazard(t);
        weight_with(design, &g, t) * (h1 - h0)
    };
    let mut rows = Vec::with_capacity(taus.len() + 1);
    rows.push(AProfileRow { tau: 0.0, quantile_level: 0.0, a: 0.0, delta_h: 0.0 });
    let mut acc = 0.0;
    let mut prev = 0.0;
    for &tau in &taus {
        acc += integrate(&integrand, prev, tau, PANEL_TOL).value;
        prev = tau;
        rows.push(AProfileRow {
            tau,
            quantile_level: 1.0 - design.control().uncured_survival(tau),
            a: acc,
            delta_h: design.treatment().cum_hazard(tau) - design.control().cum_hazard(tau),
        });
    }
    let (classification, extremum) = classify(&rows);
    Ok(AProfile { rows, classification, extremum })
}

impl AProfile {
    /// A(τ) by linear interpolation on the grid; `None` outside it.
    pub fn value_at(&self, tau: f64) -> Option<f64> {
        let rows = &self.rows;
        if tau < rows[0].tau || tau > rows[rows.len() - 1].tau {
            return None;
        }
        let idx = rows.partition_point(|r| r.tau < tau);
        if idx == 0 {
            return Some(rows[0].a);
        }
        let (lo, hi) = (&rows[idx - 1], &rows[idx]);
        if hi.tau == lo.tau {
            return Some(hi.a);
        }
        let frac = (tau - lo.tau) / (hi.tau - lo.tau);
        Some(lo.a + frac * (hi.a - lo.a))
    }

    /// Writes the plot-ready CSV. `meta` lines are emitted as `#` comments
    /// above the header.
    pub fn write_csv<W: Write>(&self, mut w: W, meta: &[String]) -> Result<()> {
        for line in meta {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "tau,quantileLevel,A,deltaH")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{}", r.tau, r.quantile_level, r.a, r.delta_h)?;
        }
        Ok(())
    }
}
