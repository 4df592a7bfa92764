//! Synthetic elections with known ground truth.
//!
//! Precincts are age-clustered: each one draws a center age, and every
//! elector is that age with probability `age_clustering`, otherwise a draw
//! from the age pyramid. Votes follow the bracket's row of `beta_true`
//! independently of the precinct.

mod enumerate;

pub use enumerate::{
    brute_force_posterior, count_tables, for_each_table, ln_dirichlet_multinomial, ExactPosterior,
    ENUMERATION_LIMIT,
};

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    BracketPartition, CellProbabilityMatrix, Dataset, OptionSet, PadronRow, PrecinctRecord, MIN_AGE,
};

/// Oldest age in the default pyramid.
pub const DEFAULT_MAX_AGE: u32 = 90;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_precincts: usize,
    pub electors_per_precinct: u64,
    pub age_clustering: f64,
    pub beta_true: CellProbabilityMatrix,
    pub partition: BracketPartition,
    pub options: OptionSet,
    pub seed: u64,
    /// Relative frequency per age; `None` is uniform over 18..=90.
    #[serde(default)]
    pub age_pyramid: Option<Vec<(u32, f64)>>,
}

impl SimConfig {
    pub fn new(
        partition: BracketPartition,
        options: OptionSet,
        beta_true: CellProbabilityMatrix,
        n_precincts: usize,
        seed: u64,
    ) -> Self {
        SimConfig {
            n_precincts,
            electors_per_precinct: 400,
            age_clustering: 0.8,
            beta_true,
            partition,
            options,
            seed,
            age_pyramid: None,
        }
    }

    fn pyramid(&self) -> Vec<(u32, f64)> {
        self.age_pyramid
            .clone()
            .unwrap_or_else(|| (MIN_AGE..=DEFAULT_MAX_AGE).map(|a| (a, 1.0)).collect())
    }

    fn check(&self) -> Result<()> {
        if self.beta_true.n_rows() != self.partition.len()
            || self.beta_true.n_cols() != self.options.len()
        {
            return Err(Error::DimensionMismatch(format!(
                "beta_true is {}x{} but partition x options is {}x{}",
                self.beta_true.n_rows(),
                self.beta_true.n_cols(),
                self.partition.len(),
                self.options.len()
            )));
        }
        if !(0.0..=1.0).contains(&self.age_clustering) {
            return Err(Error::InvalidConfig(format!(
                "age_clustering {} outside [0, 1]",
                self.age_clustering
            )));
        }
        if self.n_precincts == 0 {
            return Err(Error::InvalidConfig("need at least one precinct".into()));
        }
        Ok(())
    }
}

/// Simulator output: the observable records plus the hidden tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTruth {
    pub records: Vec<PrecinctRecord>,
    /// `true_tables[i][g][p]`: electors of row `g` choosing option `p`.
    pub true_tables: Vec<Vec<Vec<u64>>>,
    pub beta_true: CellProbabilityMatrix,
    pub partition: BracketPartition,
    pub options: OptionSet,
    /// Per precinct, `(age, electors)` sorted by age.
    pub age_counts: Vec<Vec<(u32, u64)>>,
}

impl SyntheticTruth {
    pub fn dataset(&self) -> Result<Dataset> {
        Dataset::new(
            self.partition.clone(),
            self.options.clone(),
            self.records.clone(),
        )
    }

    pub fn padron_rows(&self) -> Vec<PadronRow> {
        self.records
            .iter()
            .zip(&self.age_counts)
            .flat_map(|(r, ages)| {
                ages.iter().map(move |&(age, electors)| PadronRow {
                    precinct_id: r.precinct_id.clone(),
                    age,
                    electors,
                })
            })
            .collect()
    }

    /// Realized pooled fractions `ΣN[g][p] / ΣX[g]` of the hidden tables.
    pub fn realized_fractions(&self) -> Vec<Vec<f64>> {
        pooled_fractions(&self.true_tables)
    }
}

pub(crate) fn pooled_fractions(tables: &[Vec<Vec<u64>>]) -> Vec<Vec<f64>> {
    let Some(first) = tables.first() else {
        return Vec::new();
    };
    let mut sums = vec![vec![0u64; first[0].len()]; first.len()];
    for t in tables {
        for (s, row) in sums.iter_mut().zip(t) {
            for (a, b) in s.iter_mut().zip(row) {
                *a += b;
            }
        }
    }
    sums.iter()
        .map(|row| {
            let x: u64 = row.iter().sum();
            row.iter()
                .map(|&n| if x == 0 { 0.0 } else { n as f64 / x as f64 })
                .collect()
        })
        .collect()
}

fn precinct_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn row_samplers(beta: &CellProbabilityMatrix) -> Result<Vec<WeightedIndex<f64>>> {
    beta.values()
        .iter()
        .map(|row| {
            WeightedIndex::new(row.iter().copied())
                .map_err(|e| Error::InvalidConfig(format!("bad beta row: {e}")))
        })
        .collect()
}

fn draw_table<R: Rng>(rows: &[u64], samplers: &[WeightedIndex<f64>], n_cols: usize, rng: &mut R) -> Vec<Vec<u64>> {
    rows.iter()
        .zip(samplers)
        .map(|(&x, dist)| {
            let mut counts = vec![0u64; n_cols];
            for _ in 0..x {
                counts[dist.sample(rng)] += 1;
            }
            counts
        })
        .collect()
}

fn col_sums(table: &[Vec<u64>], n_cols: usize) -> Vec<u64> {
    (0..n_cols).map(|p| table.iter().map(|r| r[p]).sum()).collect()
}

/// A seeded β whose rows are independent Dirichlet(2, …, 2) draws.
pub fn random_beta(partition: &BracketPartition, options: &OptionSet, seed: u64) -> Result<CellProbabilityMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma = rand_distr::Gamma::new(2.0, 1.0).expect("valid gamma parameters");
    let rows = (0..partition.len())
        .map(|_| {
            let y: Vec<f64> = (0..options.len()).map(|_| gamma.sample(&mut rng)).collect();
            let s: f64 = y.iter().sum();
            y.iter().map(|v| v / s).collect()
        })
        .collect();
    CellProbabilityMatrix::new(partition.labels(), options.labels().to_vec(), rows)
}

/// Generates an age-clustered election with votes drawn from `beta_true`.
///
/// Each precinct owns an RNG stream derived from `(seed, index)`.
pub fn simulate_election(config: &SimConfig) -> Result<SyntheticTruth> {
    config.check()?;
    let pyramid = config.pyramid();
    for &(age, _) in &pyramid {
        config.partition.bracket_of(age)?;
    }
    let ages = WeightedIndex::new(pyramid.iter().map(|&(_, w)| w))
        .map_err(|e| Error::InvalidConfig(format!("bad age pyramid: {e}")))?;
    let samplers = row_samplers(&config.beta_true)?;
    let n_rows = config.partition.len();
    let n_cols = config.options.len();

    let mut records = Vec::with_capacity(config.n_precincts);
    let mut true_tables = Vec::with_capacity(config.n_precincts);
    let mut age_counts = Vec::with_capacity(config.n_precincts);

    for i in 0..config.n_precincts {
        let mut rng = precinct_rng(config.seed, i);
        let center = pyramid[ages.sample(&mut rng)].0;
        let mut by_age: BTreeMap<u32, u64> = BTreeMap::new();
        for _ in 0..config.electors_per_precinct {
            let age = if rng.random::<f64>() < config.age_clustering {
                center
            } else {
                pyramid[ages.sample(&mut rng)].0
            };
            *by_age.entry(age).or_default() += 1;
        }
        let mut rows = vec![0u64; n_rows];
        for (&age, &n) in &by_age {
            rows[config.partition.bracket_of(age)?] += n;
        }
        let table = draw_table(&rows, &samplers, n_cols, &mut rng);
        let cols = col_sums(&table, n_cols);
        records.push(PrecinctRecord {
            precinct_id: format!("P{i:05}"),
            series: format!("S{:03}", i / 10),
            department: format!("D{:02}", i / 100),
            row_marginals: rows,
            col_marginals: cols,
        });
        true_tables.push(table);
        age_counts.push(by_age.into_iter().collect());
    }

    Ok(SyntheticTruth {
        records,
        true_tables,
        beta_true: config.beta_true.clone(),
        partition: config.partition.clone(),
        options: config.options.clone(),
        age_counts,
    })
}

/// A follow-up vote by the same electors (a runoff or a plebiscite).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FollowUpVote {
    /// Records over the same brackets as the first round, columns are the
    /// follow-up options.
    pub records: Vec<PrecinctRecord>,
    /// `transfer_tables[i][p][q]`: first-round choice `p` → follow-up `q`.
    pub transfer_tables: Vec<Vec<Vec<u64>>>,
    pub transfer_true: CellProbabilityMatrix,
    pub options: OptionSet,
}

impl FollowUpVote {
    pub fn realized_fractions(&self) -> Vec<Vec<f64>> {
        pooled_fractions(&self.transfer_tables)
    }
}

/// Re-polls every elector of `first`: a voter who chose first-round option
/// `p` picks follow-up option `q` with probability `transfer[p][q]`.
pub fn simulate_follow_up(
    first: &SyntheticTruth,
    transfer: &CellProbabilityMatrix,
    options: OptionSet,
    seed: u64,
) -> Result<FollowUpVote> {
    if transfer.n_rows() != first.options.len() || transfer.n_cols() != options.len() {
        return Err(Error::DimensionMismatch(format!(
            "transfer matrix is {}x{}, expected {}x{}",
            transfer.n_rows(),
            transfer.n_cols(),
            first.options.len(),
            options.len()
        )));
    }
    let samplers = row_samplers(transfer)?;
    let n_cols = options.len();
    let mut records = Vec::with_capacity(first.records.len());
    let mut tables = Vec::with_capacity(first.records.len());
    for (i, r) in first.records.iter().enumerate() {
        let mut rng = precinct_rng(seed, i);
        let table = draw_table(&r.col_marginals, &samplers, n_cols, &mut rng);
        let cols = col_sums(&table, n_cols);
        records.push(PrecinctRecord {
            col_marginals: cols,
            ..r.clone()
        });
        tables.push(table);
    }
    Ok(FollowUpVote {
        records,
        transfer_tables: tables,
        transfer_true: transfer.clone(),
        options,
    })
}
