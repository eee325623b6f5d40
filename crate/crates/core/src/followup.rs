//! Administrative follow-up rules.
//!
//! A simulated trial accrues subjects uniformly over an accrual window and
//! then analyzes the data at a fixed calendar time τ. Both times are derived
//! from quantiles of the *control uncured* latency law and snapped to the
//! nearest quarter year, mirroring how follow-up is usually written into a
//! protocol:
//!
//! * τ is the requested quantile of the control uncured law, rounded to the
//!   nearest quarter (half away from zero).
//! * The accrual window is half of the 0.75 quantile, rounded the same way.
//!
//! Administrative censoring is then uniform on [τ_accrual, τ]: a subject
//! accrued at calendar time a ∈ [0, τ_accrual] is observed for τ − a.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::CureArm;

/// Rounds to the nearest quarter unit, halves away from zero.
pub fn round_quarter(x: f64) -> f64 {
    (4.0 * x).round() / 4.0
}

/// Follow-up plan for one simulated trial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FollowUp {
    /// Quantile of the control uncured law that τ was derived from.
    pub quantile_level: f64,
    /// Analysis (maximum follow-up) time.
    pub tau: f64,
    /// Accrual duration; censoring is uniform on [tau_accrual, tau].
    pub tau_accrual: f64,
}

impl FollowUp {
    /// Derives the plan from the control arm's uncured latency law.
    pub fn from_quantile(control: &CureArm, quantile_level: f64) -> Result<Self> {
        if !(quantile_level > 0.0 && quantile_level < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "follow-up quantile must lie in (0, 1), got {quantile_level}"
            )));
        }
        let tau = round_quarter(control.uncured_quantile(quantile_level)?);
        let tau_accrual = round_quarter(0.5 * control.uncured_quantile(0.75)?);
        if !(tau_accrual >= 0.0 && tau_accrual < tau) {
            return Err(Error::InvalidConfig(format!(
                "follow-up plan degenerate after quarter rounding: accrual {tau_accrual} \
                 must be shorter than analysis time {tau}"
            )));
        }
        Ok(FollowUp { quantile_level, tau, tau_accrual })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Dist;

    fn arm(d: Dist) -> CureArm {
        CureArm::new(0.2, d).unwrap()
    }

    #[test]
    fn weibull_quarter_rounding() {
        let control = arm(Dist::weibull(2.0, 1.0).unwrap());
        // 0.75 quantile = sqrt(ln 4) = 1.17741, tau rounds to 1.25 and the
        // accrual window to 0.5.
        let fu = FollowUp::from_quantile(&control, 0.75).unwrap();
        assert_eq!(fu.tau, 1.25);
        assert_eq!(fu.tau_accrual, 0.5);
        for (q, tau) in [(0.9, 1.5), (0.95, 1.75), (0.99, 2.25), (0.999, 2.75)] {
            let fu = FollowUp::from_quantile(&control, q).unwrap();
            assert_eq!(fu.tau, tau, "q={q}");
            assert_eq!(fu.tau_accrual, 0.5);
        }
    }

    #[test]
    fn gamma_and_loglogistic_rounding() {
        let g = arm(Dist::gamma(2.0, 1.0).unwrap());
        let fu = FollowUp::from_quantile(&g, 0.999).unwrap();
        assert_eq!(fu.tau, 9.25);
        assert_eq!(fu.tau_accrual, 1.25);

        let ll = arm(Dist::log_logistic(2.0, 1.0).unwrap());
        let fu = FollowUp::from_quantile(&ll, 0.9).unwrap();
        assert_eq!(fu.tau, 3.0);
        assert_eq!(fu.tau_accrual, 0.75);
    }

    #[test]
    fn cure_fraction_does_not_move_tau() {
        // tau is defined on the uncured law only.
        let lean = arm(Dist::weibull(2.0, 1.0).unwrap());
        let heavy = CureArm::new(0.8, Dist::weibull(2.0, 1.0).unwrap()).unwrap();
        let a = FollowUp::from_quantile(&lean, 0.9).unwrap();
        let b = FollowUp::from_quantile(&heavy, 0.9).unwrap();
        assert_eq!(a.tau, b.tau);
    }

    #[test]
    fn degenerate_rounding_is_rejected() {
        // A tiny time scale makes both times round to the same quarter:
        // the 0.75 quantile is 0.294 and its half 0.147, both rounding to
        // 0.25, so accrual end and follow-up end collide.
        let control = arm(Dist::weibull(2.0, 0.25).unwrap());
        assert!(FollowUp::from_quantile(&control, 0.75).is_err());
    }

    #[test]
    fn quantile_level_domain() {
        let control = arm(Dist::weibull(2.0, 1.0).unwrap());
        assert!(FollowUp::from_quantile(&control, 0.0).is_err());
        assert!(FollowUp::from_quantile(&control, 1.0).is_err());
    }
}
