//! Likelihood ratio test between nested mixture cure models.
//!
//! The null model shares one cure fraction and one latency law across both
//! groups (3 parameters); the alternative adds a cure odds ratio and an
//! uncured latency effect (5 parameters). Twice the log-likelihood gap is
//! compared to a chi-square with 2 degrees of freedom, whose survival
//! function is exactly exp(−x/2).

use crate::datagen::Sample;
use crate::mcm::{fit_null_alt, EffectKind, Family, MIN_EVENTS};
use crate::methods::{Auxiliary, FailureKind, Method, MethodFailure, MethodOutcome, TestResult};

/// Runs the mixture cure likelihood ratio test.
///
/// `family` and `effect` choose the parametric model to fit; in simulation
/// studies they match the generating design, as they would for an analyst
/// who knows the intended model class.
pub fn mcm_lrt(sample: &Sample, family: Family, effect: EffectKind) -> MethodOutcome {
    let method = Method::McmLrt;
    for g in [0u8, 1] {
        let events = sample.n_events_in(g);
        if events < MIN_EVENTS {
            return Err(MethodFailure::new(
                method,
                FailureKind::TooFewEvents,
                format!("group {g} has {events} events, needs {MIN_EVENTS}"),
            ));
        }
    }
    let fits = match fit_null_alt(sample, family, effect) {
        Ok(f) => f,
        Err(e) => {
            return Err(MethodFailure::new(method, FailureKind::TooFewEvents, e.to_string()))
        }
    };
    if !fits.null.converged || !fits.alt.converged {
        return Err(MethodFailure::new(
            method,
            FailureKind::NonConvergence,
            "a mixture cure fit did not converge from any start",
        ));
    }
    if fits.alt.boundary {
        return Err(MethodFailure::new(
            method,
            FailureKind::BoundaryEstimate,
            "alternative fit ran into a parameter boundary",
        ));
    }
    let lambda = (2.0 * (fits.alt.loglik - fits.null.loglik)).max(0.0);
    Ok(TestResult {
        method,
        statistic: lambda,
        p_value: (-lambda / 2.0).exp(),
        df: Some(2),
        auxiliary: Some(Auxiliary::McmLrt {
            loglik_null: fits.null.loglik,
            loglik_alt: fits.alt.loglik,
            cure_odds_ratio: fits.alt.cure_odds_ratio,
            uncured_effect: fits.alt.uncured_effect,
        }),
    })
}
