//! One Metropolis-within-Gibbs chain over latent tables, per-precinct cell
//! probabilities and the shared Dirichlet parameters.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Gamma, StandardNormal};
use statrs::function::gamma::ln_gamma;

use super::init::{ipf, round_to_margins};
use super::McmcConfig;
use crate::model::PrecinctRecord;

/// Initial random-walk scale for log alpha.
const ALPHA_STEP_INIT: f64 = 0.3;
/// Burn-in iterations between step-size adjustments.
const ADAPT_WINDOW: usize = 50;

/// Static description of one precinct's table.
struct Unit {
    rows: Vec<u64>,
    cols: Vec<u64>,
    active_rows: Vec<usize>,
    active_cols: Vec<usize>,
}

impl Unit {
    fn new(rec: &PrecinctRecord) -> Self {
        let active = |v: &[u64]| v.iter().enumerate().filter(|(_, &x)| x > 0).map(|(i, _)| i).collect();
        Unit {
            active_rows: active(&rec.row_marginals),
            active_cols: active(&rec.col_marginals),
            rows: rec.row_marginals.clone(),
            cols: rec.col_marginals.clone(),
        }
    }

    fn movable(&self) -> bool {
        self.active_rows.len() >= 2 && self.active_cols.len() >= 2
    }
}

/// What a chain hands back after its run.
pub struct ChainOutput {
    /// Per kept draw, the pooled counts `Σ_i N[i][g][p]` (row-major).
    pub draws: Vec<Vec<u64>>,
    /// Per precinct, the sum over kept draws of `N[i][g][p]`.
    pub precinct_sums: Vec<Vec<u64>>,
    pub alpha_sums: Vec<f64>,
    pub swap_accept: f64,
    pub alpha_accept: f64,
}

pub struct Chain<'a> {
    config: &'a McmcConfig,
    units: Vec<Unit>,
    n_rows: usize,
    n_cols: usize,
    tables: Vec<Vec<u64>>,
    ln_theta: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    alpha_step: Vec<f64>,
    ln_fact: Vec<f64>,
    rng: ChaCha8Rng,
    swap_tries: u64,
    swap_accepts: u64,
    alpha_tries: Vec<u64>,
    alpha_accepts: Vec<u64>,
}

impl<'a> Chain<'a> {
    pub fn new(records: &[PrecinctRecord], n_rows: usize, n_cols: usize, config: &'a McmcConfig, chain_index: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(chain_index as u64));
        let units: Vec<Unit> = records.iter().map(Unit::new).collect();
        let max_count = records.iter().map(PrecinctRecord::roll).max().unwrap_or(0) as usize;
        let mut ln_fact = Vec::with_capacity(max_count + 1);
        let mut acc = 0.0;
        ln_fact.push(0.0);
        for k in 1..=max_count {
            acc += (k as f64).ln();
            ln_fact.push(acc);
        }

        let rc = n_rows * n_cols;
        // Dispersed starts: each chain fits a different random seed table.
        let tables: Vec<Vec<u64>> = units
            .iter()
            .map(|u| {
                let seed: Vec<f64> = (0..rc).map(|_| rng.random_range(0.2..5.0)).collect();
                round_to_margins(&ipf(&seed, &u.rows, &u.cols), &u.rows, &u.cols)
            })
            .collect();

        let alpha = match &config.fixed_alpha {
            Some(a) => a.iter().flatten().copied().collect(),
            None => {
                let prior_mean = config.prior_shape / config.prior_rate;
                (0..rc).map(|_| prior_mean * rng.random_range(0.5..2.0)).collect()
            }
        };

        let mut chain = Chain {
            config,
            n_rows,
            n_cols,
            ln_theta: vec![vec![0.0; rc]; units.len()],
            units,
            tables,
            alpha,
            alpha_step: vec![ALPHA_STEP_INIT; rc],
            ln_fact,
            rng,
            swap_tries: 0,
            swap_accepts: 0,
            alpha_tries: vec![0; rc],
            alpha_accepts: vec![0; rc],
        };
        for i in 0..chain.units.len() {
            chain.draw_theta(i);
        }
        chain
    }

    pub fn run(mut self) -> ChainOutput {
        let cfg = self.config;
        let rc = self.n_rows * self.n_cols;
        let mut draws = Vec::new();
        let mut precinct_sums = vec![vec![0u64; rc]; self.units.len()];
        let mut alpha_sums = vec![0.0; rc];
        let (mut tries_after, mut accepts_after) = (0u64, 0u64);

        for it in 0..cfg.iterations {
            if it == cfg.burn_in {
                tries_after = self.swap_tries;
                accepts_after = self.swap_accepts;
            }
            self.sweep();
            if it < cfg.burn_in {
                if (it + 1) % ADAPT_WINDOW == 0 {
                    self.adapt_alpha_steps();
                }
                continue;
            }
            if (it - cfg.burn_in) % cfg.thinning != 0 {
                continue;
            }
            let mut pooled = vec![0u64; rc];
            for (table, sums) in self.tables.iter().zip(precinct_sums.iter_mut()) {
                for k in 0..rc {
                    pooled[k] += table[k];
                    sums[k] += table[k];
                }
            }
            draws.push(pooled);
            for (s, a) in alpha_sums.iter_mut().zip(&self.alpha) {
                *s += a;
            }
        }

        let swap_tries = self.swap_tries - tries_after;
        let alpha_tries: u64 = self.alpha_tries.iter().sum();
        ChainOutput {
            draws,
            precinct_sums,
            alpha_sums,
            swap_accept: ratio(self.swap_accepts - accepts_after, swap_tries),
            alpha_accept: ratio(self.alpha_accepts.iter().sum(), alpha_tries),
        }
    }

    fn sweep(&mut self) {
        for i in 0..self.units.len() {
            if self.units[i].movable() {
                self.update_table(i);
            }
            self.draw_theta(i);
        }
        if self.config.fixed_alpha.is_none() {
            self.update_alpha();
        }
    }

    /// Random 2×2 swaps that keep both margins of table `i` fixed, accepted
    /// by the ratio of multinomial likelihoods given theta.
    fn update_table(&mut self, i: usize) {
        let c = self.n_cols;
        let unit = &self.units[i];
        let table = &mut self.tables[i];
        let ln_theta = &self.ln_theta[i];
        let rng = &mut self.rng;
        let proposals = unit.active_rows.len() * unit.active_cols.len();
        for _ in 0..proposals {
            let (a, b) = pick_pair(rng, unit.active_rows.len());
            let (q, s) = pick_pair(rng, unit.active_cols.len());
            let (g1, g2) = (unit.active_rows[a], unit.active_rows[b]);
            let (p1, p2) = (unit.active_cols[q], unit.active_cols[s]);
            let m = rng.random_range(1..=self.config.proposal_step);
            // g1,p1 and g2,p2 gain m; g1,p2 and g2,p1 lose m.
            let (k11, k12, k21, k22) = (g1 * c + p1, g1 * c + p2, g2 * c + p1, g2 * c + p2);
            self.swap_tries += 1;
            if table[k12] < m || table[k21] < m {
                continue;
            }
            let lf = &self.ln_fact;
            let (n11, n12, n21, n22) = (table[k11] as usize, table[k12] as usize, table[k21] as usize, table[k22] as usize);
            let mu = m as usize;
            let log_ratio = lf[n11] + lf[n12] + lf[n21] + lf[n22]
                - lf[n11 + mu]
                - lf[n12 - mu]
                - lf[n21 - mu]
                - lf[n22 + mu]
                + m as f64 * (ln_theta[k11] - ln_theta[k12] - ln_theta[k21] + ln_theta[k22]);
            if log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio {
                table[k11] += m;
                table[k22] += m;
                table[k12] -= m;
                table[k21] -= m;
                self.swap_accepts += 1;
            }
        }
        debug_assert!(margins_hold(&self.tables[i], &self.units[i], c));
    }

    /// Conjugate draw theta[i][g] ~ Dirichlet(alpha[g] + N[i][g]) for every
    /// row with electors.
    fn draw_theta(&mut self, i: usize) {
        let c = self.n_cols;
        let mut y = vec![0.0; c];
        for &g in &self.units[i].active_rows {
            let mut total = 0.0;
            for p in 0..c {
                let k = g * c + p;
                let shape = self.alpha[k] + self.tables[i][k] as f64;
                let v: f64 = Gamma::new(shape, 1.0)
                    .map(|d| d.sample(&mut self.rng))
                    .unwrap_or(0.0);
                y[p] = v.max(f64::MIN_POSITIVE);
                total += y[p];
            }
            let ln_total = total.ln();
            for p in 0..c {
                self.ln_theta[i][g * c + p] = y[p].ln() - ln_total;
            }
        }
    }

    /// Random-walk Metropolis on log alpha[g][p], one component at a time,
    /// against the Dirichlet likelihood of the precinct thetas times the
    /// Gamma(shape, rate) prior.
    fn update_alpha(&mut self) {
        let (r, c) = (self.n_rows, self.n_cols);
        let mut suff = vec![0.0; r * c];
        let mut count = vec![0usize; r];
        for (unit, lt) in self.units.iter().zip(&self.ln_theta) {
            for &g in &unit.active_rows {
                count[g] += 1;
                for p in 0..c {
                    suff[g * c + p] += lt[g * c + p];
                }
            }
        }
        let (shape, rate) = (self.config.prior_shape, self.config.prior_rate);
        for g in 0..r {
            if count[g] == 0 {
                continue;
            }
            let n = count[g] as f64;
            for p in 0..c {
                let k = g * c + p;
                let cur = self.alpha[k];
                let rest: f64 = (0..c).filter(|&q| q != p).map(|q| self.alpha[g * c + q]).sum();
                let step: f64 = self.rng.sample(StandardNormal);
                let prop = (cur.ln() + self.alpha_step[k] * step).exp();
                if !prop.is_finite() || prop <= 0.0 {
                    self.alpha_tries[k] += 1;
                    continue;
                }
                let target = |a: f64| {
                    n * (ln_gamma(rest + a) - ln_gamma(a)) + (a - 1.0) * suff[k] + shape * a.ln() - rate * a
                };
                let log_ratio = target(prop) - target(cur);
                self.alpha_tries[k] += 1;
                if log_ratio >= 0.0 || self.rng.random::<f64>().ln() < log_ratio {
                    self.alpha[k] = prop;
                    self.alpha_accepts[k] += 1;
                }
            }
        }
    }

    /// Nudges each log-alpha step toward a 0.2–0.5 acceptance band, then
    /// resets the window counters.
    fn adapt_alpha_steps(&mut self) {
        for k in 0..self.alpha.len() {
            let rate = ratio(self.alpha_accepts[k], self.alpha_tries[k]);
            if self.alpha_tries[k] == 0 {
                continue;
            }
            if rate > 0.5 {
                self.alpha_step[k] *= 1.25;
            } else if rate < 0.2 {
                self.alpha_step[k] /= 1.25;
            }
            self.alpha_tries[k] = 0;
            self.alpha_accepts[k] = 0;
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Two distinct indices in `0..n`, ordered as drawn.
fn pick_pair<R: Rng>(rng: &mut R, n: usize) -> (usize, usize) {
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

fn margins_hold(table: &[u64], unit: &Unit, c: usize) -> bool {
    let rows_ok = unit
        .rows
        .iter()
        .enumerate()
        .all(|(g, &x)| table[g * c..(g + 1) * c].iter().sum::<u64>() == x);
    let cols_ok = unit
        .cols
        .iter()
        .enumerate()
        .all(|(p, &t)| (0..unit.rows.len()).map(|g| table[g * c + p]).sum::<u64>() == t);
    rows_ok && cols_ok
}
