//! Estimators of the row-stochastic cell probability matrix from
//! per-precinct marginals.

mod goodman;
mod holdout;
pub mod mcmc;
mod weighted;

pub use goodman::{goodman_fit, GoodmanFit};
pub use holdout::{holdout_validate, predict_shares, ValidationReport};
pub use mcmc::{md_fit, FitWarning, McmcConfig, PosteriorSummary, PrecinctPosterior};
pub use weighted::weighted_average_fit;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CellProbabilityMatrix, PrecinctRecord, TableLabels};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    WeightedAverage,
    Goodman,
    Md,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::WeightedAverage => "weighted_average",
            Method::Goodman => "goodman",
            Method::Md => "md",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weighted_average" => Ok(Method::WeightedAverage),
            "goodman" => Ok(Method::Goodman),
            "md" => Ok(Method::Md),
            other => Err(Error::InvalidConfig(format!("unknown method {other:?}"))),
        }
    }
}

/// Output of any estimator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FitOutput {
    Point(CellProbabilityMatrix),
    Regression(GoodmanFit),
    Posterior(Box<PosteriorSummary>),
}

impl FitOutput {
    /// Point estimate (posterior mean for the MCMC estimator).
    pub fn mean(&self) -> &CellProbabilityMatrix {
        match self {
            FitOutput::Point(m) => m,
            FitOutput::Regression(g) => &g.beta,
            FitOutput::Posterior(s) => &s.mean,
        }
    }

    pub fn posterior(&self) -> Option<&PosteriorSummary> {
        match self {
            FitOutput::Posterior(s) => Some(s),
            _ => None,
        }
    }

    pub fn into_mean(self) -> CellProbabilityMatrix {
        match self {
            FitOutput::Point(m) => m,
            FitOutput::Regression(g) => g.beta,
            FitOutput::Posterior(s) => s.mean,
        }
    }
}

/// Runs `method`; `config` is only consulted by the MCMC estimator.
pub fn fit(method: Method, records: &[PrecinctRecord], labels: &TableLabels, config: &McmcConfig) -> Result<FitOutput> {
    Ok(match method {
        Method::WeightedAverage => FitOutput::Point(weighted_average_fit(records, labels)?),
        Method::Goodman => FitOutput::Regression(goodman_fit(records, labels)?),
        Method::Md => FitOutput::Posterior(Box::new(md_fit(records, labels, config)?)),
    })
}

/// Share-based estimators need every elector in some column.
pub(crate) fn require_balanced(records: &[PrecinctRecord]) -> Result<()> {
    match records.iter().find(|r| !r.is_balanced()) {
        Some(r) => Err(r.mismatch()),
        None => Ok(()),
    }
}
