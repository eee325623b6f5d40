//! Two-sample testing procedures.
//!
//! Every procedure consumes a [`Sample`](crate::datagen::Sample) and produces
//! either a [`TestResult`] or a [`MethodFailure`]. Failures are expected
//! statistical degeneracies (no events in a group, a fit that refuses to
//! converge) rather than programming errors, so they are data, not `Err`:
//! simulation studies must count them per method without aborting the run.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

pub mod mcm_lrt;
pub mod two_stage;
pub mod wlr;
pub mod yp;

/// The testing procedures the crate knows how to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Standard log-rank test.
    Lr,
    /// Weighted log-rank with weight 1 - S(t-), sensitive to early differences.
    WlrEarly,
    /// Weighted log-rank with weight S(t-), sensitive to late differences.
    WlrLate,
    /// Log-rank weighted by the true log hazard ratio of the generating
    /// design. Usable in simulations only.
    OptimalLr,
    /// Adaptive test built on the Yang-Prentice short/long-term hazard
    /// ratio model.
    Yp,
    /// Two-stage procedure: log-rank first, then a bootstrap-selected
    /// weighted log-rank on the remaining error budget.
    TwoStage,
    /// Likelihood ratio test between mixture cure models with and without
    /// group effects.
    McmLrt,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Lr,
        Method::WlrEarly,
        Method::WlrLate,
        Method::OptimalLr,
        Method::Yp,
        Method::TwoStage,
        Method::McmLrt,
    ];

    /// Stable identifier used in CLI flags and result files.
    pub fn name(&self) -> &'static str {
        match self {
            Method::Lr => "lr",
            Method::WlrEarly => "wlr-early",
            Method::WlrLate => "wlr-late",
            Method::OptimalLr => "optimal-lr",
            Method::Yp => "yp",
            Method::TwoStage => "two-stage",
            Method::McmLrt => "mcm-lrt",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        match s {
            "lr" => Ok(Method::Lr),
            "wlr-early" => Ok(Method::WlrEarly),
            "wlr-late" => Ok(Method::WlrLate),
            "optimal-lr" => Ok(Method::OptimalLr),
            "yp" => Ok(Method::Yp),
            "two-stage" => Ok(Method::TwoStage),
            "mcm-lrt" => Ok(Method::McmLrt),
            other => Err(Error::InvalidConfig(format!(
                "unknown method '{other}'; expected one of lr, wlr-early, wlr-late, \
                 optimal-lr, yp, two-stage, mcm-lrt"
            ))),
        }
    }

    /// True for procedures that need the generating design, not just data.
    pub fn needs_design(&self) -> bool {
        matches!(self, Method::OptimalLr)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Extra method-specific detail attached to a result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Auxiliary {
    /// Normal-score tests: the standardized statistic's building blocks.
    Wlr {
        score: f64,
        variance: f64,
        /// True when an optimal-weight test fell back to unit weights
        /// because the design is null.
        unit_weight_fallback: bool,
    },
    /// Yang-Prentice fit detail: short- and long-term log ratios.
    Yp { beta_short: f64, beta_long: f64 },
    /// Two-stage detail: which stage rejected and what the second stage saw.
    TwoStage {
        stage: u8,
        stage1_z: f64,
        stage2_z: Option<f64>,
        /// Fleming-Harrington exponents picked by the bootstrap.
        selected_rho: Option<f64>,
        selected_gamma: Option<f64>,
        correlation: Option<f64>,
    },
    /// Mixture cure likelihood ratio detail.
    McmLrt {
        loglik_null: f64,
        loglik_alt: f64,
        /// Estimated group effects on cure odds and uncured survival.
        cure_odds_ratio: f64,
        uncured_effect: f64,
    },
}

/// Outcome of one test on one dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: Method,
    /// The test statistic on its native scale: a Z score for the log-rank
    /// family, a chi-square for the likelihood ratio tests, and the
    /// adjusted p itself for the two-stage procedure.
    pub statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom when the statistic is chi-square distributed.
    pub df: Option<u32>,
    pub auxiliary: Option<Auxiliary>,
}

impl TestResult {
    pub fn rejects_at(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Why a procedure could not produce a p-value on this dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureKind {
    /// Not enough events overall or in one group.
    TooFewEvents,
    /// The weighted score has zero variance, e.g. all weights vanish.
    DegenerateVariance,
    /// An iterative fit did not converge from any start.
    NonConvergence,
    /// A fit ran into a parameter boundary that invalidates the test.
    BoundaryEstimate,
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FailureKind::TooFewEvents => "too-few-events",
            FailureKind::DegenerateVariance => "degenerate-variance",
            FailureKind::NonConvergence => "non-convergence",
            FailureKind::BoundaryEstimate => "boundary-estimate",
        };
        f.write_str(s)
    }
}

/// A recorded degeneracy: which method failed on this dataset and why.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodFailure {
    pub method: Method,
    pub kind: FailureKind,
    pub detail: String,
}

impl MethodFailure {
    pub fn new(method: Method, kind: FailureKind, detail: impl Into<String>) -> Self {
        MethodFailure { method, kind, detail: detail.into() }
    }
}

/// The outcome of running one method on one dataset.
pub type MethodOutcome = std::result::Result<TestResult, MethodFailure>;
