//! Starting tables: iterative proportional fitting of a seed table to the
//! marginals, then rounding to a feasible integer table.

const IPF_TOLERANCE: f64 = 1e-10;
const IPF_MAX_ITER: usize = 1000;

/// Scales `seed` (row-major R×C, non-negative) until its margins match
/// `rows` and `cols`. Cells in empty rows or columns end at zero.
pub fn ipf(seed: &[f64], rows: &[u64], cols: &[u64]) -> Vec<f64> {
    let (r, c) = (rows.len(), cols.len());
    let mut t: Vec<f64> = seed
        .iter()
        .enumerate()
        .map(|(k, &s)| if rows[k / c] == 0 || cols[k % c] == 0 { 0.0 } else { s.max(f64::MIN_POSITIVE) })
        .collect();
    for _ in 0..IPF_MAX_ITER {
        for g in 0..r {
            let s: f64 = t[g * c..(g + 1) * c].iter().sum();
            if s > 0.0 {
                let f = rows[g] as f64 / s;
                t[g * c..(g + 1) * c].iter_mut().for_each(|v| *v *= f);
            }
        }
        let mut worst: f64 = 0.0;
        for p in 0..c {
            let s: f64 = (0..r).map(|g| t[g * c + p]).sum();
            if s > 0.0 {
                let f = cols[p] as f64 / s;
                (0..r).for_each(|g| t[g * c + p] *= f);
            }
        }
        for g in 0..r {
            let s: f64 = t[g * c..(g + 1) * c].iter().sum();
            worst = worst.max((s - rows[g] as f64).abs());
        }
        if worst < IPF_TOLERANCE {
            break;
        }
    }
    t
}

/// Rounds a real table with integer margins to an integer table with the
/// same margins: floor every cell, hand out the remainder greedily by
/// largest fractional part, then place anything still unassigned with the
/// northwest-corner rule. Requires `Σrows == Σcols`.
pub fn round_to_margins(real: &[f64], rows: &[u64], cols: &[u64]) -> Vec<u64> {
    let (r, c) = (rows.len(), cols.len());
    let mut table = vec![0u64; r * c];
    let mut row_left = rows.to_vec();
    let mut col_left = cols.to_vec();
    for g in 0..r {
        for p in 0..c {
            let k = g * c + p;
            let v = (real[k].max(0.0).floor() as u64).min(row_left[g]).min(col_left[p]);
            table[k] = v;
            row_left[g] -= v;
            col_left[p] -= v;
        }
    }

    let mut order: Vec<usize> = (0..r * c).collect();
    let frac = |k: usize| real[k] - real[k].floor();
    order.sort_by(|&a, &b| frac(b).total_cmp(&frac(a)).then(a.cmp(&b)));
    for k in order {
        let (g, p) = (k / c, k % c);
        if row_left[g] > 0 && col_left[p] > 0 && frac(k) > 0.0 {
            table[k] += 1;
            row_left[g] -= 1;
            col_left[p] -= 1;
        }
    }

    let (mut g, mut p) = (0, 0);
    while g < r && p < c {
        let v = row_left[g].min(col_left[p]);
        table[g * c + p] += v;
        row_left[g] -= v;
        col_left[p] -= v;
        if row_left[g] == 0 {
            g += 1;
        } else {
            p += 1;
        }
    }
    table
}
