//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Pass criterion numbers as arguments to run a
//! subset, e.g. `cargo test -p ecoinfer-cli --test acceptance -- 3 10`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use ecoinfer::analyses::{plebiscite_cross, transition_matrix, TransitionInput};
use ecoinfer::estimators::{
    goodman_fit, holdout_validate, md_fit, weighted_average_fit, McmcConfig, Method, PosteriorSummary,
};
use ecoinfer::model::{
    count_bounds, duncan_davis_bounds, BracketPartition, CellProbabilityMatrix, Dataset, OptionSet, PrecinctRecord,
    TableLabels,
};
use ecoinfer::synth::{brute_force_posterior, for_each_table, random_beta, simulate_election, simulate_follow_up, SimConfig, SyntheticTruth};
use ecoinfer::Error;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Criterion-1 data and its md fit, shared by criteria 1, 2 and 6.
struct Desk {
    truth: SyntheticTruth,
    labels: TableLabels,
    fit: PosteriorSummary,
    elapsed: Duration,
}

fn desk_scale() -> Desk {
    let partition = BracketPartition::parse("18-29,30-44,45-59,60-74,75+").unwrap();
    let options = OptionSet::with_abstention(["A", "B", "C"]).unwrap();
    // Party A fades with age, B and C grow, abstention falls.
    let beta = CellProbabilityMatrix::new(
        partition.labels(),
        options.labels().to_vec(),
        vec![
            vec![0.55, 0.15, 0.10, 0.20],
            vec![0.48, 0.22, 0.12, 0.18],
            vec![0.40, 0.30, 0.14, 0.16],
            vec![0.30, 0.38, 0.17, 0.15],
            vec![0.22, 0.44, 0.20, 0.14],
        ],
    )
    .unwrap();
    let labels = TableLabels::from_partition(&partition, &options);
    let start = Instant::now();
    let truth = simulate_election(&SimConfig::new(partition, options, beta, 300, 2014)).unwrap();
    let fit = md_fit(&truth.records, &labels, &McmcConfig::default()).unwrap();
    Desk {
        truth,
        labels,
        fit,
        elapsed: start.elapsed(),
    }
}

fn criterion_1(d: &Desk) -> Outcome {
    let beta = &d.truth.beta_true;
    let max = d.fit.mean.max_abs_diff(beta);
    let mae = d.fit.mean.mean_abs_diff(beta);
    let secs = d.elapsed.as_secs_f64();
    outcome(
        max <= 0.05 && mae <= 0.02 && secs <= 600.0,
        format!("300x400, 5x4, md max|err| {max:.4} (<= 0.05), MAE {mae:.4} (<= 0.02), {secs:.1} s (<= 600 s)"),
    )
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn criterion_2(d: &Desk) -> Outcome {
    let wa = weighted_average_fit(&d.truth.records, &d.labels).unwrap();
    let rhos: Vec<(String, f64)> = (0..d.labels.n_cols())
        .map(|p| {
            let a: Vec<f64> = (0..d.labels.n_rows()).map(|g| wa.get(g, p)).collect();
            let b: Vec<f64> = (0..d.labels.n_rows()).map(|g| d.fit.mean.get(g, p)).collect();
            (d.labels.cols[p].clone(), spearman(&a, &b))
        })
        .collect();
    let min = rhos.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let shown: Vec<String> = rhos.iter().map(|(l, r)| format!("{l} {r:.3}")).collect();
    outcome(min >= 0.9, format!("Spearman(weighted_average, md) per option: {} (>= 0.9)", shown.join(", ")))
}

fn criterion_3() -> Outcome {
    let cases: Vec<(Vec<u64>, Vec<u64>, Vec<Vec<f64>>)> = vec![
        (vec![3, 1], vec![2, 2], vec![vec![1.0; 2]; 2]),
        (vec![2, 2], vec![2, 2], vec![vec![1.0; 2]; 2]),
        (vec![4, 3], vec![2, 3, 2], vec![vec![0.5, 1.0, 2.0], vec![2.0, 1.0, 0.5]]),
        (vec![3, 3, 2], vec![5, 3], vec![vec![2.0, 1.0], vec![1.0, 2.0], vec![0.7, 0.7]]),
        (vec![6, 5, 3], vec![4, 4, 6], vec![vec![3.0, 1.0, 1.0], vec![1.0, 3.0, 1.0], vec![1.0, 1.0, 3.0]]),
    ];
    let mut worst: f64 = 0.0;
    for (k, (rows, cols, alpha)) in cases.iter().enumerate() {
        let rec = PrecinctRecord::new(format!("tiny{k}"), rows.clone(), cols.clone());
        let exact = brute_force_posterior(&rec, alpha).unwrap();
        let labels = TableLabels::new(
            (0..rows.len()).map(|g| format!("r{g}")).collect(),
            (0..cols.len()).map(|p| format!("c{p}")).collect(),
        );
        let cfg = McmcConfig {
            iterations: 20_000,
            burn_in: 2_000,
            thinning: 1,
            seed: 100 + k as u64,
            fixed_alpha: Some(alpha.clone()),
            ..McmcConfig::default()
        };
        let fit = md_fit(std::slice::from_ref(&rec), &labels, &cfg).unwrap();
        for g in 0..rows.len() {
            for p in 0..cols.len() {
                worst = worst.max((fit.mean.get(g, p) - exact.mean[g][p]).abs());
            }
        }
    }
    outcome(
        worst <= 0.02,
        format!("{} tiny instances incl. X=(3,1),T=(2,2); max |md - exact| {worst:.4} (<= 0.02)", cases.len()),
    )
}

/// Criteria 4 and 5 share one batch of randomized fits.
fn criteria_4_5() -> (Outcome, Outcome) {
    let partitions = ["18-39,40+", "18-29,30-59,60+", "18-34,35-49,50-64,65+"];
    let party_sets: [&[&str]; 3] = [&["A"], &["A", "B"], &["A", "B", "C"]];
    let (mut fits, mut bound_checks, mut bound_violations) = (0usize, 0usize, 0usize);
    let (mut norm_checks, mut norm_violations, mut goodman_skipped) = (0usize, 0usize, 0usize);
    let mut attempt = 0u64;
    while fits < 1000 {
        attempt += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(attempt);
        let partition = BracketPartition::parse(partitions[rng.random_range(0..partitions.len())]).unwrap();
        let options = OptionSet::with_abstention(party_sets[rng.random_range(0..party_sets.len())].iter().copied()).unwrap();
        let beta = random_beta(&partition, &options, attempt).unwrap();
        let mut cfg = SimConfig::new(partition.clone(), options.clone(), beta, rng.random_range(3..=8), attempt);
        cfg.electors_per_precinct = rng.random_range(8..=40);
        cfg.age_clustering = rng.random_range(0.0..=1.0);
        let truth = simulate_election(&cfg).unwrap();
        let labels = TableLabels::from_partition(&partition, &options);
        let mcmc = McmcConfig {
            chains: 2,
            iterations: 300,
            burn_in: 100,
            thinning: 2,
            seed: attempt,
            ..McmcConfig::default()
        };
        let fit = match md_fit(&truth.records, &labels, &mcmc) {
            Ok(f) => f,
            // Small random draws can leave a bracket empty; draw again.
            Err(Error::EmptyBracket(_)) => continue,
            Err(e) => panic!("fit {attempt}: {e}"),
        };
        fits += 1;

        let bounds = duncan_davis_bounds(&truth.records);
        let (r, c) = (labels.n_rows(), labels.n_cols());
        for (i, pp) in fit.precincts.iter().enumerate() {
            for g in 0..r {
                for p in 0..c {
                    bound_checks += 1;
                    if !bounds.precinct_contains(i, g, p, pp.mean[g][p]) {
                        bound_violations += 1;
                    }
                }
            }
        }
        for g in 0..r {
            for p in 0..c {
                bound_checks += 1;
                if !bounds.aggregate_contains(g, p, fit.mean.get(g, p)) {
                    bound_violations += 1;
                }
            }
        }

        let mut matrices = vec![fit.mean.clone(), weighted_average_fit(&truth.records, &labels).unwrap()];
        match goodman_fit(&truth.records, &labels) {
            Ok(gf) => matrices.push(gf.beta),
            Err(Error::RankDeficient { .. }) => goodman_skipped += 1,
            Err(e) => panic!("goodman {attempt}: {e}"),
        }
        let mut rows: Vec<Vec<f64>> = fit.precincts.iter().flat_map(|pp| {
            // Precinct rows with no electors are all zero by construction.
            pp.mean.iter().filter(|row| row.iter().sum::<f64>() > 0.0).cloned().collect::<Vec<_>>()
        }).collect();
        for m in &matrices {
            rows.extend(m.values().iter().cloned());
        }
        for row in &rows {
            norm_checks += 1;
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-9 || row.iter().any(|v| !(0.0..=1.0).contains(v)) {
                norm_violations += 1;
            }
        }
    }
    (
        outcome(
            bound_violations == 0,
            format!("{fits} randomized md fits, {bound_checks} per-precinct and aggregate cells, {bound_violations} outside bounds"),
        ),
        outcome(
            norm_violations == 0,
            format!(
                "{norm_checks} output rows (md aggregate + per-precinct, weighted_average, goodman; {goodman_skipped} rank-deficient goodman skipped), {norm_violations} violations"
            ),
        ),
    )
}

fn criterion_6(d: &Desk) -> Outcome {
    let rep = holdout_validate(&d.truth.records, &d.labels, Method::Md, &McmcConfig::default(), 0.7, 0).unwrap();
    outcome(
        rep.mae < 0.03,
        format!("70/30 split, md, {} test precincts, share MAE {:.4} (< 0.03)", rep.test_ids.len(), rep.mae),
    )
}

fn criterion_7() -> Outcome {
    let partition = BracketPartition::parse("18-29,30-44,45-59,60-74,75+").unwrap();
    let first_opts = OptionSet::with_abstention(["FA", "PN", "PC"]).unwrap();
    // Each party peaks in a different bracket; abstention is age-graded.
    let beta = CellProbabilityMatrix::new(
        partition.labels(),
        first_opts.labels().to_vec(),
        vec![
            vec![0.55, 0.05, 0.05, 0.35],
            vec![0.75, 0.08, 0.07, 0.10],
            vec![0.20, 0.10, 0.65, 0.05],
            vec![0.10, 0.75, 0.10, 0.05],
            vec![0.05, 0.45, 0.30, 0.20],
        ],
    )
    .unwrap();
    let runoff_opts = OptionSet::with_abstention(["FA", "PN"]).unwrap();
    let transfer = CellProbabilityMatrix::new(
        first_opts.labels().to_vec(),
        runoff_opts.labels().to_vec(),
        vec![
            vec![0.95, 0.02, 0.03],
            vec![0.03, 0.94, 0.03],
            vec![0.05, 0.90, 0.05],
            vec![0.05, 0.05, 0.90],
        ],
    )
    .unwrap();
    let mut cfg = SimConfig::new(partition.clone(), first_opts, beta, 300, 1);
    cfg.age_clustering = 0.95;
    let truth = simulate_election(&cfg).unwrap();
    let runoff = simulate_follow_up(&truth, &transfer, runoff_opts.clone(), 101).unwrap();
    let first = truth.dataset().unwrap();
    let second = Dataset::new(partition, runoff_opts, runoff.records).unwrap();
    let input = TransitionInput::pair(&first, &second, 0.01).unwrap();
    let md = transition_matrix(&input, Method::Md, &McmcConfig::default()).unwrap();
    let goodman = transition_matrix(&input, Method::Goodman, &McmcConfig::default()).unwrap();
    let err = md.mean().max_abs_diff(&transfer);
    let pc = md.mean().row(2);
    outcome(
        err <= 0.05,
        format!(
            "4x3 transfers incl. PC->PN 0.90, md max cell error {err:.4} (<= 0.05); PC row ({:.3}, {:.3}, {:.3}); goodman {:.4}",
            pc[0],
            pc[1],
            pc[2],
            goodman.mean().max_abs_diff(&transfer)
        ),
    )
}

fn criterion_8() -> Outcome {
    let partition = BracketPartition::parse("18-29,30-44,45-59,60-74,75+").unwrap();
    let opts = OptionSet::with_abstention(["A", "B"]).unwrap();
    let beta = CellProbabilityMatrix::new(
        partition.labels(),
        opts.labels().to_vec(),
        vec![
            vec![0.70, 0.15, 0.15],
            vec![0.55, 0.30, 0.15],
            vec![0.40, 0.45, 0.15],
            vec![0.25, 0.63, 0.12],
            vec![0.15, 0.75, 0.10],
        ],
    )
    .unwrap();
    let pleb_opts = OptionSet::plain(["si", "no_or_blank"]).unwrap();
    let cross = CellProbabilityMatrix::new(
        opts.labels().to_vec(),
        pleb_opts.labels().to_vec(),
        vec![vec![0.2, 0.8], vec![0.8, 0.2], vec![0.0, 1.0]],
    )
    .unwrap();
    let truth = simulate_election(&SimConfig::new(partition, opts, beta, 300, 3)).unwrap();
    let vote = simulate_follow_up(&truth, &cross, pleb_opts, 103).unwrap();
    let si: BTreeMap<String, u64> = vote.records.iter().map(|r| (r.precinct_id.clone(), r.col_marginals[0])).collect();
    let fit = plebiscite_cross(&truth.dataset().unwrap(), &si, Method::Md, &McmcConfig::default()).unwrap();
    let m = fit.mean();
    let expected = [[0.2, 0.8], [0.8, 0.2]];
    let err = (0..2)
        .flat_map(|g| (0..2).map(move |p| (g, p)))
        .map(|(g, p)| (m.get(g, p) - expected[g][p]).abs())
        .fold(0.0, f64::max);
    outcome(
        err <= 0.05,
        format!(
            "A ({:.3}, {:.3}), B ({:.3}, {:.3}); max error {err:.4} (<= 0.05)",
            m.get(0, 0),
            m.get(0, 1),
            m.get(1, 0),
            m.get(1, 1)
        ),
    )
}

fn cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ecoinfer"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn digests(dir: &Path) -> (Value, Value) {
    let m: Value = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    (m["inputs"].clone(), m["outputs"].clone())
}

fn criterion_9() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let s = |p: &PathBuf| p.to_str().unwrap().to_string();
    let commands: Vec<(&str, Box<dyn Fn(&Path) -> Vec<String>>)> = vec![
        (
            "simulate",
            Box::new(|out: &Path| {
                [
                    "simulate", "--precincts", "60", "--electors", "150", "--brackets", "18-34,35-54,55+",
                    "--parties", "FA,PN", "--runoff", "FA,PN", "--transfer",
                    "0.9,0.05,0.05;0.05,0.9,0.05;0.1,0.1,0.8", "--plebiscite-si", "0.3,0.7", "--seed", "9", "--out",
                ]
                .iter()
                .map(|a| a.to_string())
                .chain([out.to_str().unwrap().to_string()])
                .collect()
            }),
        ),
    ];
    let mut compared = Vec::new();
    let mut failures = Vec::new();
    let mut check = |name: &str, a: &Path, b: &Path| {
        let csv_a = fs::read(a.join("estimates.csv")).ok();
        let csv_b = fs::read(b.join("estimates.csv")).ok();
        if csv_a != csv_b {
            failures.push(format!("{name}: estimates.csv differs"));
        }
        if digests(a) != digests(b) {
            failures.push(format!("{name}: manifest digests differ"));
        }
        compared.push(name.to_string());
    };

    // Source data comes from simulate itself, run twice.
    let (sim_a, sim_b) = (root.join("sim_a"), root.join("sim_b"));
    for out in [&sim_a, &sim_b] {
        if let Err(e) = cli(&commands[0].1(out).iter().map(String::as_str).collect::<Vec<_>>()) {
            return outcome(false, e);
        }
    }
    check("simulate", &sim_a, &sim_b);

    let results = s(&sim_a.join("results.csv"));
    let padron = s(&sim_a.join("padron.csv"));
    let runoff = s(&sim_a.join("runoff_results.csv"));
    let pleb = s(&sim_a.join("plebiscite.csv"));
    let mut runs: Vec<(&str, Vec<String>)> = Vec::new();
    let ingest = |input: &str| -> Vec<String> {
        ["ingest", "--results", input, "--padron", &padron, "--brackets", "18-34,35-54,55+"].iter().map(|a| a.to_string()).collect()
    };
    runs.push(("ingest", ingest(&results)));
    runs.push(("ingest_runoff", ingest(&runoff)));
    for (name, args) in &runs {
        for tag in ["a", "b"] {
            let out = root.join(format!("{name}_{tag}"));
            let mut full = args.clone();
            full.extend(["--out".to_string(), s(&out)]);
            if let Err(e) = cli(&full.iter().map(String::as_str).collect::<Vec<_>>()) {
                return outcome(false, e);
            }
        }
        check(name, &root.join(format!("{name}_a")), &root.join(format!("{name}_b")));
    }

    let ds = s(&root.join("ingest_a/dataset.json"));
    let ds2 = s(&root.join("ingest_runoff_a/dataset.json"));
    let mcmc = ["--iterations", "1500", "--burn-in", "500", "--seed", "5"];
    let with_mcmc = |base: &[&str]| -> Vec<String> { base.iter().chain(mcmc.iter()).map(|a| a.to_string()).collect() };
    let analyses: Vec<(&str, Vec<String>)> = vec![
        ("fit_md", with_mcmc(&["fit", "--dataset", &ds, "--method", "md"])),
        ("fit_goodman", vec!["fit".into(), "--dataset".into(), ds.clone(), "--method".into(), "goodman".into()]),
        ("transitions_md", with_mcmc(&["transitions", "--first", &ds, "--second", &ds2, "--method", "md"])),
        ("plebiscite_md", with_mcmc(&["plebiscite", "--dataset", &ds, "--plebiscite", &pleb, "--method", "md"])),
        ("validate_md", with_mcmc(&["validate", "--dataset", &ds, "--method", "md"])),
    ];
    for (name, args) in &analyses {
        for tag in ["a", "b"] {
            let out = root.join(format!("{name}_{tag}"));
            let mut full = args.clone();
            full.extend(["--out".to_string(), s(&out)]);
            if let Err(e) = cli(&full.iter().map(String::as_str).collect::<Vec<_>>()) {
                return outcome(false, e);
            }
        }
        check(name, &root.join(format!("{name}_a")), &root.join(format!("{name}_b")));
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            format!("reran {} commands: estimates.csv bytes and manifest digests identical", compared.len())
        } else {
            failures.join("; ")
        },
    )
}

/// Every margin vector with `len` entries summing to `n`.
fn compositions(n: u64, len: usize) -> Vec<Vec<u64>> {
    if len == 1 {
        return vec![vec![n]];
    }
    (0..=n)
        .flat_map(|first| {
            compositions(n - first, len - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

fn criterion_10() -> Outcome {
    let shapes: [(usize, usize, u64); 7] = [(1, 3, 12), (2, 2, 12), (2, 3, 12), (3, 2, 12), (3, 3, 12), (2, 4, 9), (4, 2, 9)];
    let (mut instances, mut cells, mut loose) = (0usize, 0usize, Vec::new());
    for &(r, c, max_n) in &shapes {
        for n in 1..=max_n {
            for rows in compositions(n, r) {
                for cols in compositions(n, c) {
                    instances += 1;
                    let rec = PrecinctRecord::new("e", rows.clone(), cols.clone());
                    let b = duncan_davis_bounds(std::slice::from_ref(&rec));
                    let mut lo = vec![u64::MAX; r * c];
                    let mut hi = vec![0u64; r * c];
                    for_each_table(&rows, &cols, |t| {
                        for g in 0..r {
                            for p in 0..c {
                                lo[g * c + p] = lo[g * c + p].min(t[g][p]);
                                hi[g * c + p] = hi[g * c + p].max(t[g][p]);
                            }
                        }
                    });
                    for g in 0..r {
                        for p in 0..c {
                            cells += 1;
                            let x = rows[g];
                            let frac = |k: u64| if x == 0 { 0.0 } else { k as f64 / x as f64 };
                            let (l, h) = count_bounds(&rows, &cols, g, p);
                            let attained = b.precincts[0].lo[g][p] == frac(lo[g * c + p])
                                && b.precincts[0].hi[g][p] == frac(hi[g * c + p])
                                && (l, h) == (lo[g * c + p], hi[g * c + p]);
                            if !attained && loose.len() < 3 {
                                loose.push(format!("X={rows:?} T={cols:?} cell ({g},{p})"));
                            }
                        }
                    }
                }
            }
        }
    }
    outcome(
        loose.is_empty(),
        format!("{instances} margin pairs up to 3x3 with N <= 12 and 2x4, 4x2 with N <= 9, {cells} cells; lo and hi attained by a feasible table in every cell{}",
            if loose.is_empty() { String::new() } else { format!("; not attained: {}", loose.join(", ")) }),
    )
}

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |k: u32| selected.is_empty() || selected.contains(&k);
    let names = [
        "",
        "synthetic recovery",
        "two-method agreement",
        "oracle equivalence",
        "bounds consistency",
        "normalization and range",
        "holdout prediction",
        "transition recovery",
        "plebiscite recovery",
        "determinism",
        "bounds tightness",
    ];
    let mut results: Vec<(u32, Outcome)> = Vec::new();
    let mut record = |k: u32, o: Outcome| {
        println!("{} [{k:>2}] {}: {}", if o.pass { "PASS" } else { "FAIL" }, names[k as usize], o.detail);
        results.push((k, o));
    };

    let desk = [1, 2, 6].iter().any(|&k| wanted(k)).then(desk_scale);
    if let Some(d) = &desk {
        if wanted(1) {
            record(1, criterion_1(d));
        }
        if wanted(2) {
            record(2, criterion_2(d));
        }
    }
    if wanted(3) {
        record(3, criterion_3());
    }
    if wanted(4) || wanted(5) {
        let (c4, c5) = criteria_4_5();
        if wanted(4) {
            record(4, c4);
        }
        if wanted(5) {
            record(5, c5);
        }
    }
    if let Some(d) = &desk {
        if wanted(6) {
            record(6, criterion_6(d));
        }
    }
    if wanted(7) {
        record(7, criterion_7());
    }
    if wanted(8) {
        record(8, criterion_8());
    }
    if wanted(9) {
        record(9, criterion_9());
    }
    if wanted(10) {
        record(10, criterion_10());
    }

    let failed: Vec<u32> = results.iter().filter(|(_, o)| !o.pass).map(|(k, _)| *k).collect();
    println!("acceptance: {} passed, {} failed", results.len() - failed.len(), failed.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
