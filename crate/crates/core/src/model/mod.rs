//! Domain types shared by every estimator: option sets, age brackets,
//! per-precinct marginals and row-stochastic probability matrices.

mod bounds;

pub use bounds::{count_bounds, duncan_davis_bounds, CellBounds, PrecinctBounds};

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Youngest voting age; every partition starts here.
pub const MIN_AGE: u32 = 18;

/// Label given to the derived abstention column.
pub const ABSTAIN_LABEL: &str = "abstain";

/// Tolerance for row sums of probability matrices.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Ordered option labels, at most one of which is the abstention column.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptionSet {
    labels: Vec<String>,
    abstention: Option<usize>,
}

impl OptionSet {
    pub fn new(labels: Vec<String>, abstention: Option<usize>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::InvalidOptions(format!(
                "need at least 2 options, got {}",
                labels.len()
            )));
        }
        let mut seen = HashSet::new();
        for label in &labels {
            if label.trim().is_empty() {
                return Err(Error::InvalidOptions("empty option label".into()));
            }
            if !seen.insert(label.as_str()) {
                return Err(Error::InvalidOptions(format!("duplicate label {label:?}")));
            }
        }
        if let Some(a) = abstention {
            if a >= labels.len() {
                return Err(Error::InvalidOptions(format!(
                    "abstention index {a} out of range"
                )));
            }
        }
        Ok(OptionSet { labels, abstention })
    }

    /// Builds a set from `labels` and appends an abstention column.
    pub fn with_abstention<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let idx = labels.len();
        labels.push(ABSTAIN_LABEL.to_string());
        OptionSet::new(labels, Some(idx))
    }

    /// Builds a set with no abstention column.
    pub fn plain<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        OptionSet::new(labels.into_iter().map(Into::into).collect(), None)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn abstention(&self) -> Option<usize> {
        self.abstention
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownOption(label.to_string()))
    }
}

/// An inclusive age range; `hi == None` means open-ended ("85+").
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: u32,
    pub hi: Option<u32>,
}

impl Bracket {
    pub fn contains(&self, age: u32) -> bool {
        age >= self.lo && self.hi.is_none_or(|hi| age <= hi)
    }

    pub fn label(&self) -> String {
        match self.hi {
            Some(hi) if hi == self.lo => format!("{}", self.lo),
            Some(hi) => format!("{}-{}", self.lo, hi),
            None => format!("{}+", self.lo),
        }
    }
}

/// Contiguous, non-overlapping age brackets starting at [`MIN_AGE`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Bracket>", into = "Vec<Bracket>")]
pub struct BracketPartition {
    brackets: Vec<Bracket>,
}

impl TryFrom<Vec<Bracket>> for BracketPartition {
    type Error = Error;

    fn try_from(brackets: Vec<Bracket>) -> Result<Self> {
        BracketPartition::new(brackets)
    }
}

impl From<BracketPartition> for Vec<Bracket> {
    fn from(p: BracketPartition) -> Self {
        p.brackets
    }
}

impl BracketPartition {
    pub fn new(brackets: Vec<Bracket>) -> Result<Self> {
        let first = brackets
            .first()
            .ok_or_else(|| Error::InvalidPartition("no brackets".into()))?;
        if first.lo != MIN_AGE {
            return Err(Error::InvalidPartition(format!(
                "first bracket starts at {} instead of {MIN_AGE}",
                first.lo
            )));
        }
        for (i, b) in brackets.iter().enumerate() {
            let last = i + 1 == brackets.len();
            match b.hi {
                Some(hi) if hi < b.lo => {
                    return Err(Error::InvalidPartition(format!(
                        "bracket {} has hi < lo",
                        b.label()
                    )))
                }
                None if !last => {
                    return Err(Error::InvalidPartition(format!(
                        "open bracket {} must be last",
                        b.label()
                    )))
                }
                _ => {}
            }
            if let Some(next) = brackets.get(i + 1) {
                // hi is Some here: only the last bracket may be open.
                let hi = b.hi.unwrap_or(u32::MAX);
                if next.lo != hi.saturating_add(1) {
                    return Err(Error::InvalidPartition(format!(
                        "gap or overlap between {} and {}",
                        b.label(),
                        next.label()
                    )));
                }
            }
        }
        Ok(BracketPartition { brackets })
    }

    /// Parses `"18-24,25-29,30+"`. A bare number is a single-year bracket.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut brackets = Vec::new();
        for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let bad = || Error::InvalidPartition(format!("cannot parse bracket {part:?}"));
            let num = |s: &str| s.trim().parse::<u32>().map_err(|_| bad());
            let bracket = if let Some(lo) = part.strip_suffix('+') {
                Bracket {
                    lo: num(lo)?,
                    hi: None,
                }
            } else if let Some((lo, hi)) = part.split_once('-') {
                Bracket {
                    lo: num(lo)?,
                    hi: Some(num(hi)?),
                }
            } else {
                let age = num(part)?;
                Bracket {
                    lo: age,
                    hi: Some(age),
                }
            };
            brackets.push(bracket);
        }
        BracketPartition::new(brackets)
    }

    /// Closed brackets of `width` years from 18, with a final open bracket
    /// starting at the first bracket boundary at or beyond `top`.
    pub fn with_width(width: u32, top: u32) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidPartition("bracket width must be positive".into()));
        }
        let mut brackets = Vec::new();
        let mut lo = MIN_AGE;
        while lo < top {
            brackets.push(Bracket {
                lo,
                hi: Some(lo + width - 1),
            });
            lo += width;
        }
        brackets.push(Bracket { lo, hi: None });
        BracketPartition::new(brackets)
    }

    /// A single open bracket covering every elector.
    pub fn single() -> Self {
        BracketPartition {
            brackets: vec![Bracket {
                lo: MIN_AGE,
                hi: None,
            }],
        }
    }

    pub fn brackets(&self) -> &[Bracket] {
        &self.brackets
    }

    pub fn len(&self) -> usize {
        self.brackets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.brackets.is_empty()
    }

    pub fn is_open_ended(&self) -> bool {
        self.brackets.last().is_some_and(|b| b.hi.is_none())
    }

    pub fn bracket_of(&self, age: u32) -> Result<usize> {
        if age < MIN_AGE {
            return Err(Error::AgeBelowMinimum(age));
        }
        self.brackets
            .iter()
            .position(|b| b.contains(age))
            .ok_or(Error::AgeNotCovered(age))
    }

    pub fn labels(&self) -> Vec<String> {
        self.brackets.iter().map(Bracket::label).collect()
    }

    /// Bracket midpoints in years. An open bracket is given the width of
    /// its predecessor (or one year when it is the only bracket).
    pub fn midpoints(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.brackets.len());
        let mut prev_width = 1.0;
        for b in &self.brackets {
            let width = match b.hi {
                Some(hi) => f64::from(hi - b.lo + 1),
                None => prev_width,
            };
            out.push(f64::from(b.lo) + (width - 1.0) / 2.0);
            prev_width = width;
        }
        out
    }
}

/// One precinct's aggregate marginals.
///
/// `row_marginals` are elector counts per row category (usually age
/// brackets), `col_marginals` are counts per option.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecinctRecord {
    pub precinct_id: String,
    #[serde(default)]
    pub series: String,
    #[serde(default)]
    pub department: String,
    pub row_marginals: Vec<u64>,
    pub col_marginals: Vec<u64>,
}

impl PrecinctRecord {
    pub fn new(precinct_id: impl Into<String>, rows: Vec<u64>, cols: Vec<u64>) -> Self {
        PrecinctRecord {
            precinct_id: precinct_id.into(),
            series: String::new(),
            department: String::new(),
            row_marginals: rows,
            col_marginals: cols,
        }
    }

    /// Total electors on the roll.
    pub fn roll(&self) -> u64 {
        self.row_marginals.iter().sum()
    }

    pub fn col_total(&self) -> u64 {
        self.col_marginals.iter().sum()
    }

    pub fn is_balanced(&self) -> bool {
        self.roll() == self.col_total()
    }

    pub(crate) fn mismatch(&self) -> Error {
        Error::MarginalMismatch {
            precinct_id: self.precinct_id.clone(),
            row_total: self.roll(),
            col_total: self.col_total(),
        }
    }
}

/// Checks the accounting identity for `record` under `options`.
///
/// With an abstention column every elector must be accounted for; without
/// one, turnout may not exceed the roll.
pub fn validate_precinct(record: PrecinctRecord, options: &OptionSet) -> Result<PrecinctRecord> {
    if record.col_marginals.len() != options.len() {
        return Err(Error::DimensionMismatch(format!(
            "precinct {} has {} option counts for {} options",
            record.precinct_id,
            record.col_marginals.len(),
            options.len()
        )));
    }
    if record.row_marginals.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "precinct {} has no row marginals",
            record.precinct_id
        )));
    }
    let ok = if options.abstention().is_some() {
        record.roll() == record.col_total()
    } else {
        record.col_total() <= record.roll()
    };
    if ok {
        Ok(record)
    } else {
        Err(record.mismatch())
    }
}

/// Row and column labels of an R×C problem.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableLabels {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
}

impl TableLabels {
    pub fn new(rows: Vec<String>, cols: Vec<String>) -> Self {
        TableLabels { rows, cols }
    }

    pub fn from_partition(partition: &BracketPartition, options: &OptionSet) -> Self {
        TableLabels {
            rows: partition.labels(),
            cols: options.labels().to_vec(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    /// Checks that every record has the right shape and balanced totals.
    pub(crate) fn check_records(&self, records: &[PrecinctRecord]) -> Result<()> {
        for r in records {
            if r.row_marginals.len() != self.n_rows() || r.col_marginals.len() != self.n_cols() {
                return Err(Error::DimensionMismatch(format!(
                    "precinct {} is {}x{}, expected {}x{}",
                    r.precinct_id,
                    r.row_marginals.len(),
                    r.col_marginals.len(),
                    self.n_rows(),
                    self.n_cols()
                )));
            }
        }
        Ok(())
    }
}

/// Row-stochastic matrix of P(column | row).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellProbabilityMatrix {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl CellProbabilityMatrix {
    pub fn new(row_labels: Vec<String>, col_labels: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != row_labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} rows of values for {} row labels",
                values.len(),
                row_labels.len()
            )));
        }
        for (g, row) in values.iter().enumerate() {
            if row.len() != col_labels.len() {
                return Err(Error::DimensionMismatch(format!(
                    "row {g} has {} entries for {} columns",
                    row.len(),
                    col_labels.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::InvalidConfig(format!(
                    "probability {v} in row {:?} outside [0, 1]",
                    row_labels[g]
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidConfig(format!(
                    "row {:?} sums to {sum}",
                    row_labels[g]
                )));
            }
        }
        Ok(CellProbabilityMatrix {
            row_labels,
            col_labels,
            values,
        })
    }

    pub fn from_labels(labels: &TableLabels, values: Vec<Vec<f64>>) -> Result<Self> {
        CellProbabilityMatrix::new(labels.rows.clone(), labels.cols.clone(), values)
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row][col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row]
    }

    pub fn n_rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn max_abs_diff(&self, other: &CellProbabilityMatrix) -> f64 {
        self.values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn mean_abs_diff(&self, other: &CellProbabilityMatrix) -> f64 {
        let n = (self.n_rows() * self.n_cols()).max(1) as f64;
        self.values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / n
    }
}

/// A validated collection of precincts over a fixed partition and option set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub partition: BracketPartition,
    pub options: OptionSet,
    pub records: Vec<PrecinctRecord>,
}

impl Dataset {
    pub fn new(partition: BracketPartition, options: OptionSet, records: Vec<PrecinctRecord>) -> Result<Self> {
        let records = records
            .into_iter()
            .map(|r| {
                if r.row_marginals.len() != partition.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "precinct {} has {} brackets, partition has {}",
                        r.precinct_id,
                        r.row_marginals.len(),
                        partition.len()
                    )));
                }
                validate_precinct(r, &options)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            partition,
            options,
            records,
        })
    }

    pub fn labels(&self) -> TableLabels {
        TableLabels::from_partition(&self.partition, &self.options)
    }

    pub fn total_electors(&self) -> u64 {
        self.records.iter().map(PrecinctRecord::roll).sum()
    }
}

/// One row of the electoral roll: electors of a given age in a precinct.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadronRow {
    pub precinct_id: String,
    pub age: u32,
    pub electors: u64,
}

/// Bins per-age elector counts into per-precinct bracket marginals.
pub fn aggregate_padron(
    rows: &[PadronRow],
    partition: &BracketPartition,
) -> Result<BTreeMap<String, Vec<u64>>> {
    let mut out: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    for row in rows {
        let g = partition.bracket_of(row.age)?;
        let counts = out
            .entry(row.precinct_id.clone())
            .or_insert_with(|| vec![0; partition.len()]);
        counts[g] += row.electors;
    }
    Ok(out)
}
