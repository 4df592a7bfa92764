//! `ecoinfer`: ingest election returns, fit ecological-inference models and
//! emit reproducible reports.

mod manifest;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use ecoinfer::analyses::{
    age_party_curve, plebiscite_cross, report_emit, transition_matrix, Estimates, ReportFormat, TransitionInput,
    DEFAULT_DRIFT_THRESHOLD,
};
use ecoinfer::estimators::{holdout_validate, McmcConfig, Method};
use ecoinfer::io;
use ecoinfer::model::{BracketPartition, CellProbabilityMatrix, Dataset, OptionSet};
use ecoinfer::synth::{random_beta, simulate_election, simulate_follow_up, SimConfig, DEFAULT_MAX_AGE};

use manifest::{ErrorRecord, Run};

const THREADS_ENV: &str = "EI_THREADS";
const DATASET_FILE: &str = "dataset.json";

#[derive(Parser)]
#[command(name = "ecoinfer", version, about = "Ecological inference on aggregate election returns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Join a results CSV with a padrón CSV into a validated dataset.
    Ingest(IngestArgs),
    /// Estimate the bracket × option matrix of a dataset.
    Fit(FitArgs),
    /// Generate a synthetic election with known truth.
    Simulate(SimulateArgs),
    /// Estimate first-round → runoff transition probabilities.
    Transitions(TransitionsArgs),
    /// Estimate P(plebiscite vote | first-round option).
    Plebiscite(PlebisciteArgs),
    /// Score an estimator on a seeded train/test split of precincts.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum MethodArg {
    #[value(name = "weighted_average")]
    WeightedAverage,
    #[value(name = "goodman")]
    Goodman,
    #[value(name = "md")]
    Md,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::WeightedAverage => Method::WeightedAverage,
            MethodArg::Goodman => Method::Goodman,
            MethodArg::Md => Method::Md,
        }
    }
}

#[derive(Args, Debug, Serialize)]
#[group(required = true, multiple = false, id = "partition")]
struct BracketArgs {
    /// Comma-separated brackets such as "18-24,25-29,30+".
    #[arg(long)]
    brackets: Option<String>,
    /// Generate brackets of this many years, starting at 18.
    #[arg(long)]
    bracket_width: Option<u32>,
}

#[derive(Args, Debug, Serialize)]
struct MaxAgeArg {
    /// Start of the open-ended top bracket when using --bracket-width.
    #[arg(long, default_value_t = DEFAULT_MAX_AGE)]
    max_age: u32,
}

fn partition(b: &BracketArgs, max_age: &MaxAgeArg) -> Result<BracketPartition> {
    Ok(match (&b.brackets, b.bracket_width) {
        (Some(spec), _) => BracketPartition::parse(spec)?,
        (None, Some(w)) => BracketPartition::with_width(w, max_age.max_age)?,
        (None, None) => bail!("pass --brackets or --bracket-width"),
    })
}

/// Sampler flags; anything left out takes the library default.
#[derive(Args, Debug, Serialize)]
struct McmcArgs {
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thinning: Option<usize>,
    #[arg(long)]
    prior_shape: Option<f64>,
    #[arg(long)]
    prior_rate: Option<f64>,
    #[arg(long)]
    proposal_step: Option<u64>,
}

impl McmcArgs {
    fn config(&self, seed: u64) -> McmcConfig {
        let d = McmcConfig::default();
        McmcConfig {
            chains: self.chains.unwrap_or(d.chains),
            iterations: self.iterations.unwrap_or(d.iterations),
            burn_in: self.burn_in.unwrap_or(d.burn_in),
            thinning: self.thinning.unwrap_or(d.thinning),
            seed,
            prior_shape: self.prior_shape.unwrap_or(d.prior_shape),
            prior_rate: self.prior_rate.unwrap_or(d.prior_rate),
            proposal_step: self.proposal_step.unwrap_or(d.proposal_step),
            fixed_alpha: None,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct IngestArgs {
    #[arg(long)]
    results: PathBuf,
    #[arg(long)]
    padron: PathBuf,
    #[command(flatten)]
    brackets: BracketArgs,
    #[command(flatten)]
    max_age: MaxAgeArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct FitArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum, default_value = "md")]
    method: MethodArg,
    #[command(flatten)]
    mcmc: McmcArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[arg(long, default_value_t = 300)]
    precincts: usize,
    #[arg(long, default_value_t = 400)]
    electors: u64,
    /// Probability that an elector shares the precinct's center age.
    #[arg(long, default_value_t = 0.8)]
    clustering: f64,
    #[command(flatten)]
    brackets: BracketArgs,
    #[command(flatten)]
    max_age: MaxAgeArg,
    /// First-round options; "abstain" is appended.
    #[arg(long, default_value = "A,B,C")]
    parties: String,
    /// Rows of β separated by ';', entries by ','; random from the seed when absent.
    #[arg(long)]
    beta: Option<String>,
    /// Runoff options; "abstain" is appended. Requires --transfer.
    #[arg(long, requires = "transfer")]
    runoff: Option<String>,
    /// Transfer matrix rows (first-round options incl. abstain) → runoff options.
    #[arg(long, requires = "runoff")]
    transfer: Option<String>,
    /// P(si | party), one value per party; abstainers never vote si.
    #[arg(long)]
    plebiscite_si: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct TransitionsArgs {
    /// First-round dataset (its option counts become rows).
    #[arg(long)]
    first: PathBuf,
    /// Runoff dataset (its option counts become columns).
    #[arg(long)]
    second: PathBuf,
    #[arg(long, value_enum, default_value = "md")]
    method: MethodArg,
    #[arg(long, default_value_t = DEFAULT_DRIFT_THRESHOLD)]
    drift_threshold: f64,
    #[command(flatten)]
    mcmc: McmcArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct PlebisciteArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// CSV with columns precinct_id,si_votes.
    #[arg(long)]
    plebiscite: PathBuf,
    #[arg(long, value_enum, default_value = "md")]
    method: MethodArg,
    #[command(flatten)]
    mcmc: McmcArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct ValidateArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum, default_value = "md")]
    method: MethodArg,
    /// Fraction of precincts used for fitting.
    #[arg(long, default_value_t = 0.7)]
    split: f64,
    #[command(flatten)]
    mcmc: McmcArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, out) = match &cli.command {
        Command::Ingest(a) => ("ingest", &a.out),
        Command::Fit(a) => ("fit", &a.out),
        Command::Simulate(a) => ("simulate", &a.out),
        Command::Transitions(a) => ("transitions", &a.out),
        Command::Plebiscite(a) => ("plebiscite", &a.out),
        Command::Validate(a) => ("validate", &a.out),
    };
    let mut run = None;
    let result = configure_threads()
        .and_then(|()| {
            run = Some(Run::start(name, out)?);
            Ok(())
        })
        .and_then(|()| {
            let run = run.as_mut().expect("run started");
            match &cli.command {
                Command::Ingest(a) => cmd_ingest(a, run),
                Command::Fit(a) => cmd_fit(a, run),
                Command::Simulate(a) => cmd_simulate(a, run),
                Command::Transitions(a) => cmd_transitions(a, run),
                Command::Plebiscite(a) => cmd_plebiscite(a, run),
                Command::Validate(a) => cmd_validate(a, run),
            }
        });
    let error = result.as_ref().err().map(error_record);
    let finished = match run {
        Some(run) => run.finish(error.clone()),
        None => Ok(()),
    };
    match (error, finished) {
        (None, Ok(())) => ExitCode::SUCCESS,
        (Some(e), _) => report_error(&e),
        (None, Err(e)) => report_error(&error_record(&e)),
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("{THREADS_ENV}={raw:?} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn error_record(err: &anyhow::Error) -> ErrorRecord {
    let kind = if let Some(e) = err.downcast_ref::<ecoinfer::Error>() {
        e.kind()
    } else if err.downcast_ref::<std::io::Error>().is_some() {
        "IoFailure"
    } else {
        "Failure"
    };
    ErrorRecord {
        kind: kind.to_string(),
        message: format!("{err:#}"),
    }
}

fn report_error(e: &ErrorRecord) -> ExitCode {
    let line = json!({ "error": e });
    let _ = writeln!(std::io::stderr(), "{line}");
    ExitCode::FAILURE
}

fn print_summary(value: serde_json::Value) {
    println!("{value}");
}

fn write_json<T: Serialize>(run: &mut Run, name: &str, value: &T) -> Result<()> {
    let path = run.out.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    run.output(path);
    Ok(())
}

fn emit_report(run: &mut Run, estimates: &Estimates) -> Result<()> {
    let files = report_emit(estimates, &run.out, &[ReportFormat::Csv, ReportFormat::Svg])?;
    run.outputs(files);
    Ok(())
}

fn load_dataset(run: &mut Run, path: &Path) -> Result<Dataset> {
    run.input(path)?;
    Ok(io::read_dataset(path).with_context(|| format!("loading dataset {}", path.display()))?)
}

fn cmd_ingest(a: &IngestArgs, run: &mut Run) -> Result<()> {
    let part = partition(&a.brackets, &a.max_age)?;
    run.configure(json!({ "partition": part.labels() }), None);
    run.input(&a.results)?;
    run.input(&a.padron)?;
    let ds = io::ingest_files(&a.results, &a.padron, part)?;
    let path = run.out.join(DATASET_FILE);
    io::write_dataset(&path, &ds)?;
    run.output(path);
    print_summary(json!({
        "precincts": ds.records.len(),
        "electors": ds.total_electors(),
        "brackets": ds.partition.len(),
        "options": ds.options.labels(),
    }));
    Ok(())
}

fn cmd_fit(a: &FitArgs, run: &mut Run) -> Result<()> {
    let cfg = a.mcmc.config(a.seed);
    let method = Method::from(a.method);
    run.configure(json!({ "method": method, "mcmc": cfg }), Some(a.seed));
    let ds = load_dataset(run, &a.dataset)?;
    let curves = age_party_curve(&ds, method, &cfg)?;
    emit_report(run, &curves.estimates())?;
    write_json(run, "fit.json", &curves)?;
    let warnings = curves.fit.posterior().map(|p| p.warnings.clone()).unwrap_or_default();
    print_summary(json!({ "method": method, "rows": curves.bracket_labels.len(), "options": curves.curves.len(), "warnings": warnings }));
    Ok(())
}

fn cmd_transitions(a: &TransitionsArgs, run: &mut Run) -> Result<()> {
    let cfg = a.mcmc.config(a.seed);
    let method = Method::from(a.method);
    run.configure(json!({ "method": method, "mcmc": cfg, "drift_threshold": a.drift_threshold }), Some(a.seed));
    let first = load_dataset(run, &a.first)?;
    let second = load_dataset(run, &a.second)?;
    let input = TransitionInput::pair(&first, &second, a.drift_threshold)?;
    let out = transition_matrix(&input, method, &cfg)?;
    emit_report(run, &Estimates::from_fit(&out))?;
    write_json(
        run,
        "transitions.json",
        &json!({ "paired": input.records.len(), "unpaired": input.unpaired, "roll_drift": input.roll_drift, "fit": out }),
    )?;
    print_summary(json!({ "method": method, "paired": input.records.len(), "unpaired": input.unpaired.len() }));
    Ok(())
}

fn cmd_plebiscite(a: &PlebisciteArgs, run: &mut Run) -> Result<()> {
    let cfg = a.mcmc.config(a.seed);
    let method = Method::from(a.method);
    run.configure(json!({ "method": method, "mcmc": cfg }), Some(a.seed));
    let ds = load_dataset(run, &a.dataset)?;
    run.input(&a.plebiscite)?;
    let si = io::read_plebiscite(&a.plebiscite)?;
    let out = plebiscite_cross(&ds, &si, method, &cfg)?;
    emit_report(run, &Estimates::from_fit(&out))?;
    write_json(run, "plebiscite.json", &out)?;
    print_summary(json!({ "method": method, "rows": out.mean().n_rows() }));
    Ok(())
}

fn cmd_validate(a: &ValidateArgs, run: &mut Run) -> Result<()> {
    let cfg = a.mcmc.config(a.seed);
    let method = Method::from(a.method);
    run.configure(json!({ "method": method, "mcmc": cfg, "split": a.split }), Some(a.seed));
    let ds = load_dataset(run, &a.dataset)?;
    let report = holdout_validate(&ds.records, &ds.labels(), method, &cfg, a.split, a.seed)?;
    write_json(run, "validation.json", &report)?;
    print_summary(json!({ "method": method, "mae": report.mae, "test_precincts": report.test_ids.len() }));
    Ok(())
}

/// Parses "0.7,0.3;0.2,0.8" into rows.
fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad number {v:?} in {text:?}")))
                .collect()
        })
        .collect()
}

fn split_labels(text: &str) -> Vec<String> {
    text.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn cmd_simulate(a: &SimulateArgs, run: &mut Run) -> Result<()> {
    let part = partition(&a.brackets, &a.max_age)?;
    let options = OptionSet::with_abstention(split_labels(&a.parties))?;
    let beta = match &a.beta {
        Some(text) => CellProbabilityMatrix::new(part.labels(), options.labels().to_vec(), parse_matrix(text)?)?,
        None => random_beta(&part, &options, a.seed)?,
    };
    let mut cfg = SimConfig::new(part, options, beta, a.precincts, a.seed);
    cfg.electors_per_precinct = a.electors;
    cfg.age_clustering = a.clustering;
    run.configure(json!({ "args": a, "sim": cfg }), Some(a.seed));

    let truth = simulate_election(&cfg)?;
    let results = run.out.join("results.csv");
    let padron = run.out.join("padron.csv");
    io::write_results_csv(&results, &truth.records, &truth.options)?;
    io::write_padron_csv(&padron, &truth.padron_rows())?;
    run.output(results);
    run.output(padron);
    let ds = truth.dataset()?;
    let ds_path = run.out.join(DATASET_FILE);
    io::write_dataset(&ds_path, &ds)?;
    run.output(ds_path);

    let mut truth_json = json!({
        "beta_true": truth.beta_true,
        "realized": truth.realized_fractions(),
    });

    if let (Some(runoff), Some(transfer)) = (&a.runoff, &a.transfer) {
        let runoff_opts = OptionSet::with_abstention(split_labels(runoff))?;
        let t = CellProbabilityMatrix::new(
            truth.options.labels().to_vec(),
            runoff_opts.labels().to_vec(),
            parse_matrix(transfer)?,
        )?;
        let second = simulate_follow_up(&truth, &t, runoff_opts.clone(), a.seed.wrapping_add(1))?;
        let path = run.out.join("runoff_results.csv");
        io::write_results_csv(&path, &second.records, &runoff_opts)?;
        run.output(path);
        let rds = Dataset::new(truth.partition.clone(), runoff_opts, second.records.clone())?;
        let path = run.out.join("runoff_dataset.json");
        io::write_dataset(&path, &rds)?;
        run.output(path);
        truth_json["transfer_true"] = json!(second.transfer_true);
        truth_json["transfer_realized"] = json!(second.realized_fractions());
    }

    if let Some(text) = &a.plebiscite_si {
        let si: Vec<f64> = parse_matrix(text)?.concat();
        let parties = truth.options.len() - 1;
        if si.len() != parties {
            bail!(ecoinfer::Error::DimensionMismatch(format!(
                "--plebiscite-si has {} values for {parties} parties",
                si.len()
            )));
        }
        let mut rows: Vec<Vec<f64>> = si.iter().map(|&p| vec![p, 1.0 - p]).collect();
        rows.push(vec![0.0, 1.0]);
        let pleb_opts = OptionSet::plain(["si", "no_or_blank"])?;
        let t = CellProbabilityMatrix::new(truth.options.labels().to_vec(), pleb_opts.labels().to_vec(), rows)?;
        let vote = simulate_follow_up(&truth, &t, pleb_opts, a.seed.wrapping_add(2))?;
        let counts = vote
            .records
            .iter()
            .map(|r| (r.precinct_id.clone(), r.col_marginals[0]))
            .collect();
        let path = run.out.join("plebiscite.csv");
        io::write_plebiscite_csv(&path, &counts)?;
        run.output(path);
        truth_json["plebiscite_true"] = json!(vote.transfer_true);
        truth_json["plebiscite_realized"] = json!(vote.realized_fractions());
    }

    write_json(run, "truth.json", &truth_json)?;
    print_summary(json!({
        "precincts": truth.records.len(),
        "electors": ds.total_electors(),
        "options": truth.options.labels(),
    }));
    Ok(())
}
