//! Mixture cure arms and two-arm trial designs.
//!
//! An arm follows the mixture cure model `S(t) = π + (1 − π) S_u(t)`: a
//! fraction π of subjects is cured (never experiences the event) and the
//! rest draw event times from an uncured latency law `S_u`. The all-subject
//! hazard is `h(t) = (1 − π) f_u(t) / S(t)`; its cumulative integral is
//! bounded above by `−ln π`, which is what produces survival plateaus and
//! drives the non-standard behavior of follow-up-dependent power.
//!
//! Treatment arms are described relative to control by up to three effects:
//! a cure odds ratio, and either a proportional-hazards ratio or an
//! accelerated-failure-time time ratio on the uncured law. Both uncured
//! effects are representable exactly on top of any base family because
//! `S_u(t) = S_base(t / tr)^hr` has closed-form survival, density, hazard
//! and quantile in terms of the base law.

use serde::{Deserialize, Serialize};

use crate::dist::Dist;
use crate::error::{Error, Result};

// ── one arm ─────────────────────────────────────────────────────────────

/// One trial arm under the mixture cure model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CureArm {
    cure: f64,
    base: Dist,
    /// Proportional-hazards power applied to the base uncured survival.
    hr: f64,
    /// Time ratio (acceleration factor) applied to the base uncured law.
    tr: f64,
}

impl CureArm {
    /// Arm with cure fraction π ∈ [0, 1) and the given uncured latency law.
    pub fn new(cure: f64, latency: Dist) -> Result<Self> {
        if !(cure.is_finite() && (0.0..1.0).contains(&cure)) {
            return Err(Error::InvalidParameter(format!(
                "cure fraction must lie in [0, 1), got {cure}"
            )));
        }
        latency.validate()?;
        Ok(CureArm { cure, base: latency, hr: 1.0, tr: 1.0 })
    }

    fn with_uncured_effect(mut self, effect: UncuredEffect) -> Result<Self> {
        match effect {
            UncuredEffect::None => {}
            UncuredEffect::HazardRatio(r) => {
                if !(r.is_finite() && r > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "hazard ratio must be positive, got {r}"
                    )));
                }
                self.hr *= r;
            }
            UncuredEffect::TimeRatio(r) => {
                if !(r.is_finite() && r > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "time ratio must be positive, got {r}"
                    )));
                }
                self.tr *= r;
            }
        }
        Ok(self)
    }

    pub fn cure_fraction(&self) -> f64 {
        self.cure
    }

    pub fn base_latency(&self) -> &Dist {
        &self.base
    }

    pub fn hazard_ratio(&self) -> f64 {
        self.hr
    }

    pub fn time_ratio(&self) -> f64 {
        self.tr
    }

    // ── uncured law (latency with effects applied) ──

    pub fn uncured_survival(&self, t: f64) -> f64 {
        self.base.survival(t / self.tr).powf(self.hr)
    }

    pub fn uncured_density(&self, t: f64) -> f64 {
        let z = t / self.tr;
        let s = self.base.survival(z);
        if s <= 0.0 {
            return 0.0;
        }
        self.hr * s.powf(self.hr - 1.0) * self.base.density(z) / self.tr
    }

    pub fn uncured_hazard(&self, t: f64) -> f64 {
        self.hr * self.base.hazard(t / self.tr) / self.tr
    }

    pub fn uncured_quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "quantile level must lie strictly inside (0, 1), got {p}"
            )));
        }
        Ok(self.uncured_quantile_unchecked(p))
    }

    pub(crate) fn uncured_quantile_unchecked(&self, p: f64) -> f64 {
        if p == 0.0 {
            return 0.0;
        }
        // S_base(t/tr)^hr = 1 - p  =>  t = tr * Q_base(1 - (1-p)^(1/hr)).
        let base_p = 1.0 - (1.0 - p).powf(1.0 / self.hr);
        self.tr * self.base.quantile_unchecked(base_p)
    }

    // ── all-subject mixture law ──

    /// P(T > t) over cured and uncured subjects together.
    pub fn survival(&self, t: f64) -> f64 {
        self.cure + (1.0 - self.cure) * self.uncured_survival(t)
    }

    pub fn density(&self, t: f64) -> f64 {
        (1.0 - self.cure) * self.uncured_density(t)
    }

    /// Mixture hazard (1 − π) f_u(t) / S(t). Tends to zero as the uncured
    /// share is exhausted whenever π > 0.
    pub fn hazard(&self, t: f64) -> f64 {
        self.density(t) / self.survival(t)
    }

    /// Cumulative mixture hazard, bounded above by −ln π.
    pub fn cum_hazard(&self, t: f64) -> f64 {
        -self.survival(t).ln()
    }
}

// ── treatment effects ───────────────────────────────────────────────────

/// Effect applied to the uncured latency law of the treatment arm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum UncuredEffect {
    None,
    /// Proportional hazards on the uncured law: `S_u1 = S_u0^r`.
    HazardRatio(f64),
    /// Accelerated failure time on the uncured law: `S_u1(t) = S_u0(t / r)`.
    TimeRatio(f64),
}

impl UncuredEffect {
    pub fn label(&self) -> &'static str {
        match self {
            UncuredEffect::None => "none",
            UncuredEffect::HazardRatio(_) => "hazard-ratio",
            UncuredEffect::TimeRatio(_) => "time-ratio",
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            UncuredEffect::None => 1.0,
            UncuredEffect::HazardRatio(v) | UncuredEffect::TimeRatio(v) => v,
        }
    }
}

/// Treatment-vs-control effects for building a two-arm design.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Effects {
    /// Odds ratio on the cure fraction: odds(π₁) = OR · odds(π₀).
    pub cure_odds_ratio: f64,
    pub uncured: UncuredEffect,
    /// Explicit treatment cure fraction. Required when the control arm has
    /// no cured subjects (π₀ = 0) but a cure benefit is intended, because an
    /// odds ratio cannot move an arm off π = 0.
    pub treatment_cure: Option<f64>,
}

impl Effects {
    pub fn null() -> Self {
        Effects { cure_odds_ratio: 1.0, uncured: UncuredEffect::None, treatment_cure: None }
    }
}

// ── the two-arm design ──────────────────────────────────────────────────

/// Control and treatment arms of a randomized two-arm design.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoArmDesign {
    control: CureArm,
    treatment: CureArm,
}

impl TwoArmDesign {
    /// Design from two explicitly parameterized arms.
    pub fn new(control: CureArm, treatment: CureArm) -> Self {
        TwoArmDesign { control, treatment }
    }

    /// Builds the treatment arm by applying `effects` to `control`.
    pub fn from_effects(control: CureArm, effects: &Effects) -> Result<Self> {
        let or = effects.cure_odds_ratio;
        if !(or.is_finite() && or > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cure odds ratio must be positive, got {or}"
            )));
        }
        let pi1 = match effects.treatment_cure {
            Some(p) => {
                if !(p.is_finite() && (0.0..1.0).contains(&p)) {
                    return Err(Error::InvalidParameter(format!(
                        "treatment cure fraction must lie in [0, 1), got {p}"
                    )));
                }
                p
            }
            None => {
                let pi0 = control.cure_fraction();
                if pi0 == 0.0 && or != 1.0 {
                    return Err(Error::InvalidConfig(
                        "control arm has cure fraction 0, so a cure odds ratio cannot \
                         produce a cured treatment arm; set an explicit treatment cure \
                         fraction instead"
                            .into(),
                    ));
                }
                let odds = or * pi0 / (1.0 - pi0);
                odds / (1.0 + odds)
            }
        };
        let treatment = CureArm {
            cure: pi1,
            base: control.base,
            hr: control.hr,
            tr: control.tr,
        }
        .with_uncured_effect(effects.uncured)?;
        Ok(TwoArmDesign { control, treatment })
    }

    pub fn control(&self) -> &CureArm {
        &self.control
    }

    pub fn treatment(&self) -> &CureArm {
        &self.treatment
    }

    /// True when the two arms follow literally the same law, so every
    /// hazard-based contrast is identically zero.
    pub fn is_null(&self) -> bool {
        self.control == self.treatment
    }

    /// ln(h₁(t) / h₀(t)) of the mixture hazards, or `None` where either
    /// hazard is zero or non-finite (only possible at the support edges).
    pub fn log_hazard_ratio(&self, t: f64) -> Option<f64> {
        let h0 = self.control.hazard(t);
        let h1 = self.treatment.hazard(t);
        if h0 > 0.0 && h1 > 0.0 && h0.is_finite() && h1.is_finite() {
            Some((h1 / h0).ln())
        } else {
            None
        }
    }
}
