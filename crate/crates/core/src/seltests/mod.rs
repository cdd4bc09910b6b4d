//! Significance statistics and p-values along the selection path.

pub mod covariance;
pub mod extreme;
pub mod spacing;
pub mod tmax;

use std::fmt;

pub use covariance::{
    cov_pvalue, cov_stat_fit_form, cov_stat_knot_form, covariance_parts, covariance_test,
    criterion_diff_stat, infer_knot_constant, CovarianceParts, CovarianceSeries,
};
pub use extreme::{gap_stat, gumbel_pvalue, EvConstants};
pub use spacing::{spacing_pvalue, spacing_test};
pub use tmax::{tmax_conditional_pvalue, tmax_mc_pvalue, ConditionalMc, McPvalue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Covariance,
    Spacing,
    Tmax,
    TmaxConditional,
    Gumbel,
    Gap,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Covariance => "covariance",
            Method::Spacing => "spacing",
            Method::Tmax => "tmax",
            Method::TmaxConditional => "tmax_conditional",
            Method::Gumbel => "gumbel",
            Method::Gap => "gap",
        }
    }

    pub fn is_monte_carlo(self) -> bool {
        matches!(self, Method::Tmax | Method::TmaxConditional)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "covariance" => Method::Covariance,
            "spacing" => Method::Spacing,
            "tmax" => Method::Tmax,
            "tmax_conditional" => Method::TmaxConditional,
            "gumbel" => Method::Gumbel,
            "gap" => Method::Gap,
            other => return Err(crate::Error::Domain(format!("unknown test method `{other}`"))),
        })
    }
}

/// Result of one test at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub step: usize,
    pub method: Method,
    pub statistic: f64,
    pub pvalue: f64,
    /// Monte Carlo standard error; present exactly for Monte Carlo methods.
    pub mc_se: Option<f64>,
    pub diagnostics: Vec<String>,
}

impl TestOutcome {
    pub(crate) fn new(step: usize, method: Method, statistic: f64, pvalue: f64) -> Self {
        debug_assert!(!method.is_monte_carlo());
        Self { step, method, statistic, pvalue: pvalue.clamp(0.0, 1.0), mc_se: None, diagnostics: Vec::new() }
    }
}
