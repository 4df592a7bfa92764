//! Hierarchical multinomial-Dirichlet model for R×C ecological inference.
//!
//! ```text
//! N[i][g][·]  ~ Multinomial(X[i][g], θ[i][g][·])   (rows and columns of N[i] fixed)
//! θ[i][g][·]  ~ Dirichlet(α[g][·])
//! α[g][p]     ~ Gamma(shape, rate)
//! ```
//!
//! Each sweep updates the latent tables by margin-preserving 2×2 swaps, the
//! cell probabilities by conjugate Dirichlet draws, and α by a random walk
//! on its log. The reported quantity is the pooled fraction
//! `F[g][p] = Σ_i N[i][g][p] / Σ_i X[i][g]`.

mod chain;
pub mod diagnostics;
mod init;

pub use init::{ipf, round_to_margins};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use self::chain::{Chain, ChainOutput};
use self::diagnostics::{effective_sample_size, quantile_sorted, rhat};
use crate::error::{Error, Result};
use crate::model::{CellProbabilityMatrix, PrecinctRecord, TableLabels};

/// R-hat above this attaches a non-convergence warning.
pub const RHAT_WARNING: f64 = 1.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub chains: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub seed: u64,
    /// Gamma shape of the α hyperprior.
    pub prior_shape: f64,
    /// Gamma rate of the α hyperprior.
    pub prior_rate: f64,
    /// Largest magnitude of a latent-table swap.
    pub proposal_step: u64,
    /// Holds α at these values (rows × options) instead of sampling it.
    #[serde(default)]
    pub fixed_alpha: Option<Vec<Vec<f64>>>,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            chains: 4,
            iterations: 5000,
            burn_in: 1000,
            thinning: 5,
            seed: 0,
            prior_shape: 4.0,
            prior_rate: 2.0,
            proposal_step: 4,
            fixed_alpha: None,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.chains < 1 {
            return fail("chains must be at least 1");
        }
        if self.thinning < 1 {
            return fail("thinning must be at least 1");
        }
        if self.burn_in >= self.iterations {
            return fail("burn_in must be smaller than iterations");
        }
        if !(self.prior_shape > 0.0 && self.prior_rate > 0.0) {
            return fail("prior shape and rate must be positive");
        }
        if self.proposal_step < 1 {
            return fail("proposal_step must be at least 1");
        }
        if let Some(a) = &self.fixed_alpha {
            if a.iter().flatten().any(|&v| !(v > 0.0 && v.is_finite())) {
                return fail("fixed alpha entries must be positive and finite");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FitWarning {
    NonConvergence { max_rhat: f64 },
}

/// Posterior mean cell fractions of one precinct.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecinctPosterior {
    pub precinct_id: String,
    pub mean: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub mean: CellProbabilityMatrix,
    pub sd: Vec<Vec<f64>>,
    /// 95% equal-tailed credible interval, widened to contain the mean.
    pub ci_lo: Vec<Vec<f64>>,
    pub ci_hi: Vec<Vec<f64>>,
    /// Present when at least two chains ran.
    pub rhat: Option<Vec<Vec<f64>>>,
    /// Smallest effective sample size over cells.
    pub effective_samples: usize,
    /// Kept draws over all chains.
    pub draws: usize,
    pub precincts: Vec<PrecinctPosterior>,
    pub alpha_mean: Vec<Vec<f64>>,
    pub swap_acceptance: f64,
    pub alpha_acceptance: f64,
    pub warnings: Vec<FitWarning>,
}

impl PosteriorSummary {
    pub fn max_rhat(&self) -> Option<f64> {
        self.rhat
            .as_ref()
            .map(|r| r.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max))
    }
}

/// Fits the hierarchical multinomial-Dirichlet model by MCMC.
///
/// Output is a deterministic function of the record order and `config`;
/// chains run concurrently on the rayon pool, each seeded with
/// `seed + chain_index`.
pub fn md_fit(records: &[PrecinctRecord], labels: &TableLabels, config: &McmcConfig) -> Result<PosteriorSummary> {
    config.validate()?;
    if records.is_empty() {
        return Err(Error::InvalidConfig("no precincts to fit".into()));
    }
    labels.check_records(records)?;
    if let Some(bad) = records.iter().find(|r| !r.is_balanced()) {
        return Err(Error::NoFeasibleTable(bad.precinct_id.clone()));
    }
    let (r, c) = (labels.n_rows(), labels.n_cols());
    if let Some(a) = &config.fixed_alpha {
        if a.len() != r || a.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch(format!("fixed alpha must be {r}x{c}")));
        }
    }
    let row_totals: Vec<u64> = (0..r)
        .map(|g| records.iter().map(|rec| rec.row_marginals[g]).sum())
        .collect();
    if let Some(g) = row_totals.iter().position(|&x| x == 0) {
        return Err(Error::EmptyBracket(labels.rows[g].clone()));
    }

    let outputs: Vec<ChainOutput> = (0..config.chains)
        .into_par_iter()
        .map(|k| Chain::new(records, r, c, config, k).run())
        .collect();

    summarize(records, labels, &row_totals, &outputs, config.chains)
}

fn summarize(
    records: &[PrecinctRecord],
    labels: &TableLabels,
    row_totals: &[u64],
    outputs: &[ChainOutput],
    n_chains: usize,
) -> Result<PosteriorSummary> {
    let (r, c) = (labels.n_rows(), labels.n_cols());
    let draws: usize = outputs.iter().map(|o| o.draws.len()).sum();
    if draws == 0 {
        return Err(Error::InvalidConfig("no draws kept after burn-in and thinning".into()));
    }

    let mut mean = vec![vec![0.0; c]; r];
    let mut sd = vec![vec![0.0; c]; r];
    let mut ci_lo = vec![vec![0.0; c]; r];
    let mut ci_hi = vec![vec![0.0; c]; r];
    let mut rhats = vec![vec![1.0; c]; r];
    let mut min_ess = f64::INFINITY;

    for g in 0..r {
        let x = row_totals[g] as f64;
        for p in 0..c {
            let k = g * c + p;
            let total: u128 = outputs.iter().flat_map(|o| &o.draws).map(|d| d[k] as u128).sum();
            // Integer sums keep the mean exact when the cell never moves.
            let mean_count = total as f64 / draws as f64;
            mean[g][p] = total as f64 / (draws as f64 * x);
            let ss: f64 = outputs
                .iter()
                .flat_map(|o| &o.draws)
                .map(|d| (d[k] as f64 - mean_count).powi(2))
                .sum();
            sd[g][p] = if draws > 1 { (ss / (draws - 1) as f64).sqrt() / x } else { 0.0 };

            let traces: Vec<Vec<f64>> = outputs
                .iter()
                .map(|o| o.draws.iter().map(|d| d[k] as f64 / x).collect())
                .collect();
            let mut all: Vec<f64> = traces.iter().flatten().copied().collect();
            all.sort_by(f64::total_cmp);
            ci_lo[g][p] = quantile_sorted(&all, 0.025).min(mean[g][p]);
            ci_hi[g][p] = quantile_sorted(&all, 0.975).max(mean[g][p]);
            if n_chains >= 2 {
                rhats[g][p] = rhat(&traces);
            }
            if all.first() != all.last() {
                min_ess = min_ess.min(effective_sample_size(&traces));
            }
        }
    }

    let precincts = records
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let mut m = vec![vec![0.0; c]; r];
            for g in 0..r {
                let x = rec.row_marginals[g];
                if x == 0 {
                    continue;
                }
                for p in 0..c {
                    let s: u64 = outputs.iter().map(|o| o.precinct_sums[i][g * c + p]).sum();
                    m[g][p] = s as f64 / (draws as f64 * x as f64);
                }
            }
            PrecinctPosterior {
                precinct_id: rec.precinct_id.clone(),
                mean: m,
            }
        })
        .collect();

    let alpha_mean = (0..r)
        .map(|g| {
            (0..c)
                .map(|p| outputs.iter().map(|o| o.alpha_sums[g * c + p]).sum::<f64>() / draws as f64)
                .collect()
        })
        .collect();

    let rhat = (n_chains >= 2).then_some(rhats);
    let mut warnings = Vec::new();
    if let Some(rh) = &rhat {
        let max = rh.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        if max > RHAT_WARNING || max.is_nan() {
            warnings.push(FitWarning::NonConvergence { max_rhat: max });
        }
    }
    let avg = |f: fn(&ChainOutput) -> f64| outputs.iter().map(f).sum::<f64>() / outputs.len() as f64;

    Ok(PosteriorSummary {
        mean: CellProbabilityMatrix::from_labels(labels, mean)?,
        sd,
        ci_lo,
        ci_hi,
        rhat,
        effective_samples: if min_ess.is_finite() { min_ess as usize } else { draws },
        draws,
        precincts,
        alpha_mean,
        swap_acceptance: avg(|o| o.swap_accept),
        alpha_acceptance: avg(|o| o.alpha_accept),
        warnings,
    })
}
