//! Exhaustive enumeration of integer tables with fixed margins and the
//! exact Dirichlet-multinomial posterior over them.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::model::PrecinctRecord;

/// Largest roll `brute_force_posterior` will enumerate.
pub const ENUMERATION_LIMIT: u64 = 14;

/// Calls `visit` on every non-negative integer table with the given row
/// and column sums, in lexicographic row-major order.
pub fn for_each_table<F>(rows: &[u64], cols: &[u64], mut visit: F)
where
    F: FnMut(&[Vec<u64>]),
{
    if rows.iter().sum::<u64>() != cols.iter().sum::<u64>() || rows.is_empty() || cols.is_empty() {
        return;
    }
    let mut table = vec![vec![0u64; cols.len()]; rows.len()];
    let mut col_left = cols.to_vec();
    fill(0, 0, rows[0], rows, &mut col_left, &mut table, &mut visit);
}

fn fill<F>(
    g: usize,
    p: usize,
    row_left: u64,
    rows: &[u64],
    col_left: &mut [u64],
    table: &mut [Vec<u64>],
    visit: &mut F,
) where
    F: FnMut(&[Vec<u64>]),
{
    let n_cols = col_left.len();
    if p + 1 == n_cols {
        // Last column of the row takes what is left, if the column allows.
        if row_left > col_left[p] {
            return;
        }
        table[g][p] = row_left;
        col_left[p] -= row_left;
        if g + 1 == rows.len() {
            if col_left.iter().all(|&c| c == 0) {
                visit(table);
            }
        } else {
            fill(g + 1, 0, rows[g + 1], rows, col_left, table, visit);
        }
        col_left[p] += row_left;
        return;
    }
    let rest: u64 = col_left[p + 1..].iter().sum();
    let lo = row_left.saturating_sub(rest);
    let hi = row_left.min(col_left[p]);
    for v in lo..=hi {
        table[g][p] = v;
        col_left[p] -= v;
        fill(g, p + 1, row_left - v, rows, col_left, table, visit);
        col_left[p] += v;
    }
}

/// Number of tables with the given margins.
pub fn count_tables(rows: &[u64], cols: &[u64]) -> usize {
    let mut n = 0;
    for_each_table(rows, cols, |_| n += 1);
    n
}

/// Exact posterior mean of every cell fraction.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactPosterior {
    /// `mean[g][p]` is E[N[g][p]] / X[g]; rows with no electors are zero.
    pub mean: Vec<Vec<f64>>,
    pub tables: usize,
}

fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// Log Dirichlet-multinomial probability of `counts` given `alpha`.
pub fn ln_dirichlet_multinomial(counts: &[u64], alpha: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let a: f64 = alpha.iter().sum();
    let mut out = ln_factorial(n) + ln_gamma(a) - ln_gamma(n as f64 + a);
    for (&k, &al) in counts.iter().zip(alpha) {
        out += ln_gamma(k as f64 + al) - ln_gamma(al) - ln_factorial(k);
    }
    out
}

/// Enumerates every table consistent with `record`'s marginals and weights
/// each by its Dirichlet-multinomial likelihood under `alpha[g][p]`.
pub fn brute_force_posterior(record: &PrecinctRecord, alpha: &[Vec<f64>]) -> Result<ExactPosterior> {
    let rows = &record.row_marginals;
    let cols = &record.col_marginals;
    let total = record.roll();
    if total > ENUMERATION_LIMIT {
        return Err(Error::TooLargeToEnumerate {
            total,
            limit: ENUMERATION_LIMIT,
        });
    }
    if alpha.len() != rows.len() || alpha.iter().any(|a| a.len() != cols.len()) {
        return Err(Error::DimensionMismatch(
            "alpha must be rows x options".into(),
        ));
    }
    if alpha.iter().flatten().any(|&a| !(a > 0.0)) {
        return Err(Error::InvalidConfig("alpha entries must be positive".into()));
    }

    let mut entries: Vec<(f64, Vec<Vec<u64>>)> = Vec::new();
    for_each_table(rows, cols, |t| {
        let lw: f64 = t
            .iter()
            .zip(alpha)
            .map(|(row, a)| ln_dirichlet_multinomial(row, a))
            .sum();
        entries.push((lw, t.to_vec()));
    });
    if entries.is_empty() {
        return Err(Error::NoFeasibleTable(record.precinct_id.clone()));
    }

    let max = entries.iter().map(|e| e.0).fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = entries.iter().map(|e| (e.0 - max).exp()).sum();
    let mut mean = vec![vec![0.0; cols.len()]; rows.len()];
    for (lw, t) in &entries {
        let w = (lw - max).exp() / z;
        for (g, row) in t.iter().enumerate() {
            for (p, &n) in row.iter().enumerate() {
                mean[g][p] += w * n as f64;
            }
        }
    }
    for (g, row) in mean.iter_mut().enumerate() {
        let x = rows[g];
        for v in row.iter_mut() {
            *v = if x == 0 { 0.0 } else { *v / x as f64 };
        }
    }
    Ok(ExactPosterior {
        mean,
        tables: entries.len(),
    })
}
