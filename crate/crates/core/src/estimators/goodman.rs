//! Goodman ecological regression with box constraints.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CellProbabilityMatrix, PrecinctRecord, TableLabels};

use super::require_balanced;

const RANK_TOLERANCE: f64 = 1e-10;
const CD_TOLERANCE: f64 = 1e-14;
const CD_MAX_SWEEPS: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodmanFit {
    /// Clamped to [0, 1] and row-renormalized.
    pub beta: CellProbabilityMatrix,
    /// Unconstrained least-squares solution, possibly outside [0, 1].
    pub raw: Vec<Vec<f64>>,
    /// Box-constrained solution before row renormalization.
    pub constrained: Vec<Vec<f64>>,
    /// Largest |row sum - 1| of `constrained`.
    pub renormalization_delta: f64,
    pub rank: usize,
}

/// Regresses each option's share on the row composition of every
/// precinct, weighting precincts by their roll.
///
/// For each column `p` this minimizes
/// `Σ_i N_i (v[i][p] - Σ_g w[i][g] β[g][p])²` over `0 ≤ β ≤ 1`.
pub fn goodman_fit(records: &[PrecinctRecord], labels: &TableLabels) -> Result<GoodmanFit> {
    labels.check_records(records)?;
    require_balanced(records)?;
    let (r, c) = (labels.n_rows(), labels.n_cols());

    let used: Vec<&PrecinctRecord> = records.iter().filter(|rec| rec.roll() > 0).collect();
    let n = used.len();
    let mut design = DMatrix::<f64>::zeros(n, r);
    let mut shares = DMatrix::<f64>::zeros(n, c);
    let mut weights = DVector::<f64>::zeros(n);
    for (i, rec) in used.iter().enumerate() {
        let roll = rec.roll() as f64;
        weights[i] = roll;
        for g in 0..r {
            design[(i, g)] = rec.row_marginals[g] as f64 / roll;
        }
        for p in 0..c {
            shares[(i, p)] = rec.col_marginals[p] as f64 / roll;
        }
    }

    let rank = if n == 0 {
        0
    } else {
        let sv = design.clone().svd(false, false).singular_values;
        let max = sv.max();
        sv.iter().filter(|&&s| s > RANK_TOLERANCE * max.max(1.0)).count()
    };
    if rank < r {
        return Err(Error::RankDeficient { rank, rows: r });
    }

    // Gram matrix and right-hand sides of the weighted normal equations.
    let mut wd = design.clone();
    for (i, mut row) in wd.row_iter_mut().enumerate() {
        row *= weights[i];
    }
    let gram = design.transpose() * &wd;
    let rhs = wd.transpose() * &shares;
    let chol = gram
        .clone()
        .cholesky()
        .ok_or(Error::RankDeficient { rank, rows: r })?;
    let unconstrained = chol.solve(&rhs);

    let mut raw = vec![vec![0.0; c]; r];
    let mut constrained = vec![vec![0.0; c]; r];
    for p in 0..c {
        let col: Vec<f64> = (0..r).map(|g| unconstrained[(g, p)]).collect();
        let boxed = box_least_squares(&gram, &rhs.column(p).into_owned(), &col);
        for g in 0..r {
            raw[g][p] = col[g];
            constrained[g][p] = boxed[g];
        }
    }

    let mut delta: f64 = 0.0;
    let mut beta = Vec::with_capacity(r);
    for row in &constrained {
        let sum: f64 = row.iter().sum();
        delta = delta.max((sum - 1.0).abs());
        if sum > 0.0 {
            beta.push(row.iter().map(|v| v / sum).collect());
        } else {
            beta.push(vec![1.0 / c as f64; c]);
        }
    }

    Ok(GoodmanFit {
        beta: CellProbabilityMatrix::from_labels(labels, beta)?,
        raw,
        constrained,
        renormalization_delta: delta,
        rank,
    })
}

/// Minimizes `½βᵀGβ - bᵀβ` over the unit box by cyclic coordinate descent,
/// starting from the clamped unconstrained solution. Returns the
/// unconstrained solution untouched when it is already feasible.
fn box_least_squares(gram: &DMatrix<f64>, b: &DVector<f64>, unconstrained: &[f64]) -> Vec<f64> {
    if unconstrained.iter().all(|v| (0.0..=1.0).contains(v)) {
        return unconstrained.to_vec();
    }
    let r = unconstrained.len();
    let mut beta: Vec<f64> = unconstrained.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    for _ in 0..CD_MAX_SWEEPS {
        let mut moved: f64 = 0.0;
        for g in 0..r {
            let diag = gram[(g, g)];
            if diag <= 0.0 {
                continue;
            }
            let off: f64 = (0..r).filter(|&h| h != g).map(|h| gram[(g, h)] * beta[h]).sum();
            let next = ((b[g] - off) / diag).clamp(0.0, 1.0);
            moved = moved.max((next - beta[g]).abs());
            beta[g] = next;
        }
        if moved < CD_TOLERANCE {
            break;
        }
    }
    beta
}
