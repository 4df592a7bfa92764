//! Method-of-bounds envelopes for latent cell counts.

use serde::{Deserialize, Serialize};

use super::PrecinctRecord;

/// Per-precinct bounds on cell fractions `N[g][p] / X[g]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecinctBounds {
    pub precinct_id: String,
    pub lo: Vec<Vec<f64>>,
    pub hi: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellBounds {
    pub precincts: Vec<PrecinctBounds>,
    /// Elector-weighted bounds on the pooled fractions `ΣN[g][p] / ΣX[g]`.
    pub aggregate_lo: Vec<Vec<f64>>,
    pub aggregate_hi: Vec<Vec<f64>>,
}

impl CellBounds {
    /// Whether `fraction` for `(g, p)` of precinct `i` lies inside its bounds.
    pub fn precinct_contains(&self, i: usize, g: usize, p: usize, fraction: f64) -> bool {
        let b = &self.precincts[i];
        b.lo[g][p] <= fraction && fraction <= b.hi[g][p]
    }

    pub fn aggregate_contains(&self, g: usize, p: usize, fraction: f64) -> bool {
        self.aggregate_lo[g][p] <= fraction && fraction <= self.aggregate_hi[g][p]
    }
}

/// Integer bounds on cell `(g, p)` of a table with the given marginals.
pub fn count_bounds(rows: &[u64], cols: &[u64], g: usize, p: usize) -> (u64, u64) {
    let n: u64 = rows.iter().sum();
    let x = rows[g];
    if x == 0 {
        return (0, 0);
    }
    let t = cols[p];
    let lo = t.saturating_sub(n - x);
    let hi = x.min(t);
    (lo, hi)
}

/// Deterministic feasibility envelope of every cell in every precinct.
///
/// Cells with no electors in the row get `[0, 0]`. Aggregate bounds sum the
/// integer bounds before dividing, so they agree exactly with pooled
/// fractions computed from feasible tables.
pub fn duncan_davis_bounds(records: &[PrecinctRecord]) -> CellBounds {
    let n_rows = records.first().map_or(0, |r| r.row_marginals.len());
    let n_cols = records.first().map_or(0, |r| r.col_marginals.len());
    let mut lo_sum = vec![vec![0u64; n_cols]; n_rows];
    let mut hi_sum = vec![vec![0u64; n_cols]; n_rows];
    let mut row_sum = vec![0u64; n_rows];

    let precincts = records
        .iter()
        .map(|r| {
            let mut lo = vec![vec![0.0; n_cols]; n_rows];
            let mut hi = vec![vec![0.0; n_cols]; n_rows];
            for g in 0..n_rows {
                let x = r.row_marginals[g];
                row_sum[g] += x;
                for p in 0..n_cols {
                    let (l, h) = count_bounds(&r.row_marginals, &r.col_marginals, g, p);
                    lo_sum[g][p] += l;
                    hi_sum[g][p] += h;
                    if x > 0 {
                        lo[g][p] = l as f64 / x as f64;
                        hi[g][p] = h as f64 / x as f64;
                    }
                }
            }
            PrecinctBounds {
                precinct_id: r.precinct_id.clone(),
                lo,
                hi,
            }
        })
        .collect();

    let ratio = |sums: &[Vec<u64>]| -> Vec<Vec<f64>> {
        sums.iter()
            .zip(&row_sum)
            .map(|(row, &x)| {
                row.iter()
                    .map(|&s| if x == 0 { 0.0 } else { s as f64 / x as f64 })
                    .collect()
            })
            .collect()
    };

    CellBounds {
        precincts,
        aggregate_lo: ratio(&lo_sum),
        aggregate_hi: ratio(&hi_sum),
    }
}
