use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{fit, McmcConfig, Method};
use crate::error::{Error, Result};
use crate::model::{CellProbabilityMatrix, PrecinctRecord, TableLabels};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub method: Method,
    pub split_fraction: f64,
    pub seed: u64,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    /// Mean absolute error of predicted vs observed shares over every test
    /// precinct and option.
    pub mae: f64,
    /// `(option label, MAE)` per option.
    pub per_option_mae: Vec<(String, f64)>,
}

/// Predicted option shares `Σ_g w[g] β[g][p]` for one precinct.
pub fn predict_shares(record: &PrecinctRecord, beta: &CellProbabilityMatrix) -> Vec<f64> {
    let n = record.roll() as f64;
    (0..beta.n_cols())
        .map(|p| {
            record
                .row_marginals
                .iter()
                .enumerate()
                .map(|(g, &x)| x as f64 / n * beta.get(g, p))
                .sum()
        })
        .collect()
}

/// Fits on a seeded random subset of precincts and scores vote-share
/// predictions on the rest.
pub fn holdout_validate(
    records: &[PrecinctRecord],
    labels: &TableLabels,
    method: Method,
    config: &McmcConfig,
    split_fraction: f64,
    seed: u64,
) -> Result<ValidationReport> {
    if !(split_fraction > 0.0 && split_fraction < 1.0) {
        return Err(Error::InvalidSplit(split_fraction));
    }
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (split_fraction * records.len() as f64).round() as usize;
    let n_test = records.len().saturating_sub(n_train);
    if n_train == 0 || n_test == 0 {
        return Err(Error::SplitTooSmall {
            train: n_train,
            test: n_test,
        });
    }
    let (train_idx, test_idx) = order.split_at(n_train);
    let train: Vec<PrecinctRecord> = train_idx.iter().map(|&i| records[i].clone()).collect();
    let test: Vec<&PrecinctRecord> = test_idx.iter().map(|&i| &records[i]).collect();

    let beta = fit(method, &train, labels, config)?.into_mean();

    let c = labels.n_cols();
    let mut err = vec![0.0; c];
    let mut scored = 0usize;
    for rec in &test {
        let n = rec.roll();
        if n == 0 {
            continue;
        }
        scored += 1;
        let pred = predict_shares(rec, &beta);
        for p in 0..c {
            err[p] += (pred[p] - rec.col_marginals[p] as f64 / n as f64).abs();
        }
    }
    let denom = scored.max(1) as f64;
    let per_option: Vec<(String, f64)> = labels
        .cols
        .iter()
        .zip(&err)
        .map(|(l, e)| (l.clone(), e / denom))
        .collect();
    let mae = per_option.iter().map(|(_, e)| e).sum::<f64>() / c as f64;

    Ok(ValidationReport {
        method,
        split_fraction,
        seed,
        train_ids: train.iter().map(|r| r.precinct_id.clone()).collect(),
        test_ids: test.iter().map(|r| r.precinct_id.clone()).collect(),
        mae,
        per_option_mae: per_option,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels() -> TableLabels {
        TableLabels::new(vec!["y".into(), "o".into()], vec!["a".into(), "b".into()])
    }

    fn homogeneous(n: usize) -> Vec<PrecinctRecord> {
        // beta = [[0.7, 0.3], [0.2, 0.8]] reproduced exactly
        (0..n)
            .map(|i| {
                if i % 2 == 0 {
                    PrecinctRecord::new(format!("y{i}"), vec![100, 0], vec![70, 30])
                } else {
                    PrecinctRecord::new(format!("o{i}"), vec![0, 200], vec![40, 160])
                }
            })
            .collect()
    }

    #[test]
    fn noiseless_goodman_has_zero_error() {
        let rep = holdout_validate(&homogeneous(20), &labels(), Method::Goodman, &McmcConfig::default(), 0.7, 1).unwrap();
        assert!(rep.mae < 1e-12, "mae {}", rep.mae);
        assert_eq!(rep.train_ids.len(), 14);
        assert_eq!(rep.test_ids.len(), 6);
    }

    #[test]
    fn split_bounds() {
        let recs = homogeneous(4);
        for bad in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(
                holdout_validate(&recs, &labels(), Method::WeightedAverage, &McmcConfig::default(), bad, 0),
                Err(Error::InvalidSplit(_))
            ));
        }
        assert!(matches!(
            holdout_validate(&recs[..2], &labels(), Method::WeightedAverage, &McmcConfig::default(), 0.1, 0),
            Err(Error::SplitTooSmall { train: 0, test: 2 })
        ));
    }

    #[test]
    fn split_is_seeded() {
        let recs = homogeneous(30);
        let run = |seed| {
            holdout_validate(&recs, &labels(), Method::WeightedAverage, &McmcConfig::default(), 0.5, seed)
                .unwrap()
                .test_ids
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }
}
