//! The three headline analyses: vote probability by age bracket,
//! first-round → runoff transfers, and party × referendum cross-tabulation.
//! All of them reduce to an R×C problem handed to an estimator.

mod report;

pub use report::{read_estimates_csv, report_emit, EstimateRow, Estimates, ReportFormat, Spread, ESTIMATES_FILE, PLOTS_DIR};

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{fit, FitOutput, McmcConfig, Method};
use crate::model::{Dataset, PrecinctRecord, TableLabels};

/// Default ceiling on per-precinct roll drift between rounds.
pub const DEFAULT_DRIFT_THRESHOLD: f64 = 0.01;

pub const SI_LABEL: &str = "si";
pub const NO_LABEL: &str = "no_or_blank";

/// Probability of one option across brackets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub label: String,
    pub y: Vec<f64>,
    /// Posterior sd band, MCMC only.
    pub sd: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSet {
    /// Bracket midpoints in years.
    pub x: Vec<f64>,
    pub bracket_labels: Vec<String>,
    pub curves: Vec<Curve>,
    pub fit: FitOutput,
}

impl CurveSet {
    pub fn estimates(&self) -> Estimates {
        Estimates::from_fit(&self.fit).with_positions(self.x.clone())
    }
}

/// Vote probability per option (abstention included) as a function of age.
pub fn age_party_curve(dataset: &Dataset, method: Method, config: &McmcConfig) -> Result<CurveSet> {
    let labels = dataset.labels();
    let out = fit(method, &dataset.records, &labels, config)?;
    let mean = out.mean();
    let sd = out.posterior().map(|s| &s.sd);
    let curves = (0..labels.n_cols())
        .map(|p| Curve {
            label: labels.cols[p].clone(),
            y: (0..labels.n_rows()).map(|g| mean.get(g, p)).collect(),
            sd: sd.map(|sd| sd.iter().map(|row| row[p]).collect()),
        })
        .collect();
    Ok(CurveSet {
        x: dataset.partition.midpoints(),
        bracket_labels: labels.rows,
        curves,
        fit: out,
    })
}

/// Paired first-round and runoff marginals, reconciled per precinct.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionInput {
    pub labels: TableLabels,
    /// Rows: first-round option counts. Columns: runoff option counts.
    pub records: Vec<PrecinctRecord>,
    /// Per paired precinct, `(id, (runoff roll - first-round total) / first-round total)`.
    pub roll_drift: Vec<(String, f64)>,
    /// Precincts present in only one round.
    pub unpaired: Vec<String>,
}

impl TransitionInput {
    /// Pairs precincts by exact id. Any difference between the first-round
    /// total and the runoff column total is absorbed by the runoff
    /// abstention column, provided the roll drift stays below `threshold`.
    pub fn pair(first: &Dataset, second: &Dataset, threshold: f64) -> Result<Self> {
        let by_id: HashMap<&str, &PrecinctRecord> =
            second.records.iter().map(|r| (r.precinct_id.as_str(), r)).collect();
        let first_ids: HashMap<&str, ()> = first.records.iter().map(|r| (r.precinct_id.as_str(), ())).collect();
        let mut unpaired: Vec<String> = second
            .records
            .iter()
            .filter(|r| !first_ids.contains_key(r.precinct_id.as_str()))
            .map(|r| r.precinct_id.clone())
            .collect();

        let abstain = second.options.abstention();
        let mut records = Vec::new();
        let mut roll_drift = Vec::new();
        for r1 in &first.records {
            let Some(r2) = by_id.get(r1.precinct_id.as_str()) else {
                unpaired.push(r1.precinct_id.clone());
                continue;
            };
            let total1 = r1.col_total();
            let roll2 = r2.roll();
            let drift = if total1 == 0 {
                if roll2 == 0 { 0.0 } else { f64::INFINITY }
            } else {
                (roll2 as f64 - total1 as f64) / total1 as f64
            };
            if drift != 0.0 && drift.abs() >= threshold {
                return Err(Error::RollDriftExceeded {
                    precinct_id: r1.precinct_id.clone(),
                    drift: drift.abs(),
                    threshold,
                });
            }
            let mut cols = r2.col_marginals.clone();
            let gap = total1 as i64 - r2.col_total() as i64;
            if gap != 0 {
                let a = abstain.ok_or_else(|| Error::Reconcile {
                    precinct_id: r1.precinct_id.clone(),
                    detail: "runoff has no abstention column to absorb roll drift".into(),
                })?;
                let adjusted = cols[a] as i64 + gap;
                if adjusted < 0 {
                    return Err(Error::Reconcile {
                        precinct_id: r1.precinct_id.clone(),
                        detail: format!("runoff votes exceed first-round total by {}", -gap),
                    });
                }
                cols[a] = adjusted as u64;
            }
            roll_drift.push((r1.precinct_id.clone(), drift));
            records.push(PrecinctRecord {
                row_marginals: r1.col_marginals.clone(),
                col_marginals: cols,
                ..r1.clone()
            });
        }
        if records.is_empty() {
            return Err(Error::NoPairedPrecincts);
        }
        unpaired.sort();
        Ok(TransitionInput {
            labels: TableLabels::new(first.options.labels().to_vec(), second.options.labels().to_vec()),
            records,
            roll_drift,
            unpaired,
        })
    }
}

/// P(runoff choice | first-round choice).
pub fn transition_matrix(input: &TransitionInput, method: Method, config: &McmcConfig) -> Result<FitOutput> {
    if input.records.is_empty() {
        return Err(Error::NoPairedPrecincts);
    }
    fit(method, &input.records, &input.labels, config)
}

/// Builds the party × (si, no/blank) problem. Rows are first-round options
/// other than abstention; the "no" column holds every first-round voter who
/// did not vote si.
pub fn plebiscite_input(first: &Dataset, si_votes: &BTreeMap<String, u64>) -> Result<(TableLabels, Vec<PrecinctRecord>)> {
    let keep: Vec<usize> = (0..first.options.len())
        .filter(|&p| Some(p) != first.options.abstention())
        .collect();
    let labels = TableLabels::new(
        keep.iter().map(|&p| first.options.labels()[p].clone()).collect(),
        vec![SI_LABEL.to_string(), NO_LABEL.to_string()],
    );
    let mut records = Vec::new();
    for r in &first.records {
        let Some(&si) = si_votes.get(&r.precinct_id) else {
            continue;
        };
        let rows: Vec<u64> = keep.iter().map(|&p| r.col_marginals[p]).collect();
        let voters: u64 = rows.iter().sum();
        if si > voters {
            return Err(Error::MarginalMismatch {
                precinct_id: r.precinct_id.clone(),
                row_total: voters,
                col_total: si,
            });
        }
        records.push(PrecinctRecord {
            row_marginals: rows,
            col_marginals: vec![si, voters - si],
            ..r.clone()
        });
    }
    if records.is_empty() {
        return Err(Error::NoPairedPrecincts);
    }
    Ok((labels, records))
}

/// P(plebiscite vote | first-round party).
pub fn plebiscite_cross(
    first: &Dataset,
    si_votes: &BTreeMap<String, u64>,
    method: Method,
    config: &McmcConfig,
) -> Result<FitOutput> {
    let (labels, records) = plebiscite_input(first, si_votes)?;
    fit(method, &records, &labels, config)
}
