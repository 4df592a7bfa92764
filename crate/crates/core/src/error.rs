use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precinct {precinct_id}: row marginals sum to {row_total} but column marginals sum to {col_total}")]
    MarginalMismatch {
        precinct_id: String,
        row_total: u64,
        col_total: u64,
    },

    #[error("marginal mismatch in {} precinct(s): {}", .0.len(), .0.join(", "))]
    MarginalMismatches(Vec<String>),

    #[error("negative count {value} for {what}")]
    NegativeCount { what: String, value: i64 },

    #[error("unknown option label {0:?}")]
    UnknownOption(String),

    #[error("invalid option set: {0}")]
    InvalidOptions(String),

    #[error("invalid bracket partition: {0}")]
    InvalidPartition(String),

    #[error("age {0} is below the voting minimum of 18")]
    AgeBelowMinimum(u32),

    #[error("age {0} is not covered by the bracket partition")]
    AgeNotCovered(u32),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("bracket {0:?} has no electors in any precinct")]
    EmptyBracket(String),

    #[error("rank deficient design: rank {rank} < {rows} rows")]
    RankDeficient { rank: usize, rows: usize },

    #[error("precinct {0}: no feasible table for its marginals")]
    NoFeasibleTable(String),

    #[error("{total} electors is too many to enumerate (limit {limit})")]
    TooLargeToEnumerate { total: u64, limit: u64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("split fraction {0} must lie strictly inside (0, 1)")]
    InvalidSplit(f64),

    #[error("split leaves {train} training and {test} test precincts")]
    SplitTooSmall { train: usize, test: usize },

    #[error("no precinct ids are shared between the two inputs")]
    NoPairedPrecincts,

    #[error("precinct {precinct_id}: roll drift {drift:.4} exceeds threshold {threshold:.4}")]
    RollDriftExceeded {
        precinct_id: String,
        drift: f64,
        threshold: f64,
    },

    #[error("precinct {precinct_id}: {detail}")]
    Reconcile { precinct_id: String, detail: String },

    #[error("precinct {0} appears in only one input file")]
    JoinFailure(String),

    #[error("{path}: parse error at line {line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error("I/O failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MarginalMismatch { .. } | Error::MarginalMismatches(_) => "MarginalMismatch",
            Error::NegativeCount { .. } => "NegativeCount",
            Error::UnknownOption(_) => "UnknownOption",
            Error::InvalidOptions(_) => "InvalidOptions",
            Error::InvalidPartition(_) => "InvalidPartition",
            Error::AgeBelowMinimum(_) => "AgeBelowMinimum",
            Error::AgeNotCovered(_) => "AgeNotCovered",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::EmptyBracket(_) => "EmptyBracket",
            Error::RankDeficient { .. } => "RankDeficient",
            Error::NoFeasibleTable(_) => "NoFeasibleTable",
            Error::TooLargeToEnumerate { .. } => "TooLargeToEnumerate",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::InvalidSplit(_) => "InvalidSplit",
            Error::SplitTooSmall { .. } => "SplitTooSmall",
            Error::NoPairedPrecincts => "NoPairedPrecincts",
            Error::RollDriftExceeded { .. } => "RollDriftExceeded",
            Error::Reconcile { .. } => "Reconcile",
            Error::JoinFailure(_) => "JoinFailure",
            Error::Parse { .. } => "ParseError",
            Error::Io(_) => "IoFailure",
            Error::Json(_) => "JsonError",
            Error::Csv(_) => "CsvError",
        }
    }
}
