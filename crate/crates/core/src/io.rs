//! CSV ingestion and dataset (de)serialization.
//!
//! Results are long format, `precinct_id,series,department,option,votes`;
//! the padrón is `precinct_id,age,electors`; plebiscite counts are
//! `precinct_id,si_votes`. Every file needs a header row.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{aggregate_padron, BracketPartition, Dataset, OptionSet, PadronRow, PrecinctRecord, ABSTAIN_LABEL};

/// One line of a results file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultRow {
    pub precinct_id: String,
    pub series: String,
    pub department: String,
    pub option: String,
    pub votes: u64,
}

#[derive(Deserialize)]
struct RawResult {
    precinct_id: String,
    series: String,
    department: String,
    option: String,
    votes: i64,
}

#[derive(Deserialize)]
struct RawPadron {
    precinct_id: String,
    age: u32,
    electors: i64,
}

#[derive(Serialize, Deserialize)]
struct RawPlebiscite {
    precinct_id: String,
    si_votes: i64,
}

/// Reads `path` with a required header, pairing each row with its 1-based
/// line number.
fn read_rows<T: DeserializeOwned>(path: &Path, expected: &[&str]) -> Result<Vec<(u64, T)>> {
    let shown = path.display().to_string();
    let parse_err = |line: u64, message: String| Error::Parse {
        path: shown.clone(),
        line,
        message,
    };
    let mut reader = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header != expected {
        return Err(parse_err(
            1,
            format!("expected header {:?}, found {:?}", expected.join(","), header.join(",")),
        ));
    }
    let mut out = Vec::new();
    for row in reader.deserialize::<T>() {
        match row {
            Ok(v) => out.push((out.len() as u64 + 2, v)),
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(out.len() as u64 + 2);
                return Err(parse_err(line, e.to_string()));
            }
        }
    }
    Ok(out)
}

fn non_negative(value: i64, what: impl FnOnce() -> String) -> Result<u64> {
    u64::try_from(value).map_err(|_| Error::NegativeCount { what: what(), value })
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    read_rows::<RawResult>(path, &["precinct_id", "series", "department", "option", "votes"])?
        .into_iter()
        .map(|(line, r)| {
            let votes = non_negative(r.votes, || {
                format!("votes of {} in precinct {} (line {line})", r.option, r.precinct_id)
            })?;
            Ok(ResultRow {
                precinct_id: r.precinct_id,
                series: r.series,
                department: r.department,
                option: r.option,
                votes,
            })
        })
        .collect()
}

pub fn read_padron(path: &Path) -> Result<Vec<PadronRow>> {
    read_rows::<RawPadron>(path, &["precinct_id", "age", "electors"])?
        .into_iter()
        .map(|(line, r)| {
            let electors = non_negative(r.electors, || {
                format!("electors aged {} in precinct {} (line {line})", r.age, r.precinct_id)
            })?;
            Ok(PadronRow {
                precinct_id: r.precinct_id,
                age: r.age,
                electors,
            })
        })
        .collect()
}

/// Per-precinct "si" counts. Duplicate ids are rejected.
pub fn read_plebiscite(path: &Path) -> Result<BTreeMap<String, u64>> {
    let mut out = BTreeMap::new();
    for (line, r) in read_rows::<RawPlebiscite>(path, &["precinct_id", "si_votes"])? {
        let si = non_negative(r.si_votes, || format!("si_votes of precinct {} (line {line})", r.precinct_id))?;
        if out.insert(r.precinct_id.clone(), si).is_some() {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line,
                message: format!("duplicate precinct {}", r.precinct_id),
            });
        }
    }
    Ok(out)
}

/// Joins results and padrón into a validated dataset.
///
/// Options are ordered by first appearance. An "abstain" column is derived
/// as roll minus votes unless the results already carry one, in which case
/// it must balance the roll. Precincts appear in results order.
pub fn ingest(results: &[ResultRow], padron: &[PadronRow], partition: BracketPartition) -> Result<Dataset> {
    let rows_by_id = aggregate_padron(padron, &partition)?;

    let mut option_labels: Vec<String> = Vec::new();
    let mut option_index: HashMap<&str, usize> = HashMap::new();
    let mut explicit_abstain = false;
    for r in results {
        if r.option == ABSTAIN_LABEL {
            explicit_abstain = true;
        } else if !option_index.contains_key(r.option.as_str()) {
            option_index.insert(&r.option, option_labels.len());
            option_labels.push(r.option.clone());
        }
    }
    let options = OptionSet::with_abstention(option_labels)?;
    let abstain = options.len() - 1;

    struct Pending {
        series: String,
        department: String,
        votes: Vec<u64>,
        seen: HashSet<usize>,
    }
    let mut order: Vec<&str> = Vec::new();
    let mut pending: HashMap<&str, Pending> = HashMap::new();
    for r in results {
        let entry = pending.entry(&r.precinct_id).or_insert_with(|| {
            order.push(&r.precinct_id);
            Pending {
                series: r.series.clone(),
                department: r.department.clone(),
                votes: vec![0; options.len()],
                seen: HashSet::new(),
            }
        });
        let p = if r.option == ABSTAIN_LABEL {
            abstain
        } else {
            option_index[r.option.as_str()]
        };
        if !entry.seen.insert(p) {
            return Err(Error::InvalidOptions(format!(
                "precinct {} lists option {:?} more than once",
                r.precinct_id, r.option
            )));
        }
        entry.votes[p] = r.votes;
    }

    if let Some(id) = order.iter().find(|id| !rows_by_id.contains_key(**id)) {
        return Err(Error::JoinFailure(id.to_string()));
    }
    if let Some(id) = rows_by_id.keys().find(|id| !pending.contains_key(id.as_str())) {
        return Err(Error::JoinFailure(id.clone()));
    }

    let mut records = Vec::with_capacity(order.len());
    let mut mismatched = Vec::new();
    for id in order {
        let mut p = pending.remove(id).expect("every ordered id is pending");
        let rows = rows_by_id[id].clone();
        let roll: u64 = rows.iter().sum();
        let cast: u64 = p.votes[..abstain].iter().sum();
        if explicit_abstain {
            if cast + p.votes[abstain] != roll {
                mismatched.push(id.to_string());
                continue;
            }
        } else if cast > roll {
            mismatched.push(id.to_string());
            continue;
        } else {
            p.votes[abstain] = roll - cast;
        }
        records.push(PrecinctRecord {
            precinct_id: id.to_string(),
            series: p.series,
            department: p.department,
            row_marginals: rows,
            col_marginals: p.votes,
        });
    }
    if !mismatched.is_empty() {
        return Err(Error::MarginalMismatches(mismatched));
    }
    Dataset::new(partition, options, records)
}

/// Reads both CSV files and joins them.
pub fn ingest_files(results: &Path, padron: &Path, partition: BracketPartition) -> Result<Dataset> {
    ingest(&read_results(results)?, &read_padron(padron)?, partition)
}

/// Long-format results for `records`, leaving out the abstention column so
/// the output ingests back to the same dataset.
pub fn write_results_csv(path: &Path, records: &[PrecinctRecord], options: &OptionSet) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    for r in records {
        for (p, label) in options.labels().iter().enumerate() {
            if Some(p) == options.abstention() {
                continue;
            }
            w.serialize(ResultRow {
                precinct_id: r.precinct_id.clone(),
                series: r.series.clone(),
                department: r.department.clone(),
                option: label.clone(),
                votes: r.col_marginals[p],
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_padron_csv(path: &Path, rows: &[PadronRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_plebiscite_csv(path: &Path, si: &BTreeMap<String, u64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    for (id, &v) in si {
        w.serialize(RawPlebiscite {
            precinct_id: id.clone(),
            si_votes: v as i64,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dataset(path: &Path, dataset: &Dataset) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, dataset)?;
    std::io::Write::write_all(&mut w, b"\n")?;
    Ok(())
}

/// Reads a dataset file and re-validates every record.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let raw: Dataset = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    Dataset::new(raw.partition, raw.options, raw.records)
}
