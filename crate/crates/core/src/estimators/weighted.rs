use crate::error::{Error, Result};
use crate::model::{CellProbabilityMatrix, PrecinctRecord, TableLabels};

use super::require_balanced;

/// Weighted average of per-precinct option shares.
///
/// Row `g` of the result averages every precinct's observed option shares
/// `T[i]/N[i]`, weighted by the share of that precinct's roll falling in
/// row `g`. Shares are taken over the full roll, so abstention must be a
/// column.
pub fn weighted_average_fit(records: &[PrecinctRecord], labels: &TableLabels) -> Result<CellProbabilityMatrix> {
    if records.is_empty() {
        return Err(Error::InvalidConfig("no precincts to fit".into()));
    }
    labels.check_records(records)?;
    require_balanced(records)?;

    let (r, c) = (labels.n_rows(), labels.n_cols());
    let mut num = vec![vec![0.0; c]; r];
    let mut den = vec![0.0; r];
    for rec in records {
        let n = rec.roll();
        if n == 0 {
            continue;
        }
        let n = n as f64;
        for (g, &x) in rec.row_marginals.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let w = x as f64 / n;
            den[g] += w;
            for (acc, &t) in num[g].iter_mut().zip(&rec.col_marginals) {
                *acc += w * (t as f64 / n);
            }
        }
    }

    let mut beta = Vec::with_capacity(r);
    for g in 0..r {
        if den[g] <= 0.0 {
            return Err(Error::EmptyBracket(labels.rows[g].clone()));
        }
        beta.push(num[g].iter().map(|v| (v / den[g]).clamp(0.0, 1.0)).collect());
    }
    CellProbabilityMatrix::from_labels(labels, beta)
}
