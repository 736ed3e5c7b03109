//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // --- dataset ingestion ---
    #[error("cannot read {path}: {source}")]
    DatasetRead {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("schema column `{column}` missing from CSV header")]
    MissingColumn { column: String },
    #[error("row {row}, column `{column}`: cannot parse `{value}` as {expected}")]
    UnparseableCell {
        row: usize,
        column: String,
        value: String,
        expected: &'static str,
    },
    #[error("duplicate record id `{id}` (rows {first} and {second})")]
    DuplicateId {
        id: String,
        first: usize,
        second: usize,
    },
    #[error("record `{id}`: non-monotone funnel — outcome at stage `{stage}` requires a pass at `{earlier}`")]
    NonMonotoneFunnel {
        id: String,
        stage: String,
        earlier: String,
    },
    #[error("record `{id}`: protected attribute `{attribute}` has value `{value}` outside the declared category set")]
    UnknownCategory {
        id: String,
        attribute: String,
        value: String,
    },
    #[error("record `{id}`: non-finite value in column `{column}`")]
    NonFiniteValue { id: String, column: String },
    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    // --- grouping ---
    #[error("unknown protected attribute `{0}`")]
    UnknownAttribute(String),
    #[error("no record has values for all grouping attributes [{attributes}]")]
    EmptyGrouping { attributes: String },
    #[error("grouping scheme must list exactly one attribute unless intersectional")]
    NonIntersectionalMultiAttribute,
    #[error("grouping scheme lists no attributes")]
    EmptyScheme,

    // --- audits ---
    #[error("stage `{0}` is not declared in the schema")]
    UnknownStage(String),
    #[error("stage `{0}` has zero applicants in every group")]
    StageEmpty(String),
    #[error("impact ratio needs at least 2 eligible groups, found {0}")]
    TooFewGroups(usize),
    #[error("column `{0}` is not declared in the schema")]
    UnknownColumn(String),
    #[error("labels missing for {0} grouped records")]
    MissingLabels(usize),

    // --- statistics ---
    #[error("{test} requires {requirement}")]
    InvalidTestInput {
        test: &'static str,
        requirement: String,
    },
    #[error("pooled covariance is singular at dimension(s) {dims:?}")]
    SingularCovariance { dims: Vec<usize> },

    // --- clustering / training ---
    #[error("k-means: {0}")]
    KMeans(String),
    #[error("clustering covers {clustered} records but the grouped view covers {grouped}")]
    PartitionMismatch { clustered: usize, grouped: usize },
    #[error("training: {0}")]
    Training(String),
    #[error("training diverged at epoch {epoch}: {what}")]
    Diverged { epoch: usize, what: String },

    // --- uk ---
    #[error("pool for comparison is empty: no record is affected by practice `{practice}`")]
    EmptyPool { practice: String },
    #[error("sub-pool {which} the protected characteristic is empty")]
    EmptySubPool { which: &'static str },

    // --- text ---
    #[error("lexicon: {0}")]
    Lexicon(String),

    // --- funnel ---
    #[error("no pair of reviewers shares a scored record")]
    NoCoScoredRecords,

    // --- config / generator ---
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("generator spec: {0}")]
    GeneratorSpec(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv write error: {0}")]
    CsvWrite(#[from] csv::Error),
}

impl Error {
    /// Exit code the CLI maps this error to. Unreadable data is 2,
    /// invalid configuration 3, everything else 1. Audit findings are
    /// not errors and never shift the exit code away from 0.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DatasetRead { .. }
            | Error::Csv { .. }
            | Error::MissingColumn { .. }
            | Error::UnparseableCell { .. }
            | Error::DuplicateId { .. }
            | Error::NonMonotoneFunnel { .. }
            | Error::UnknownCategory { .. }
            | Error::NonFiniteValue { .. } => 2,
            Error::InvalidConfig(_) | Error::InvalidSchema(_) | Error::GeneratorSpec(_) => 3,
            _ => 1,
        }
    }
}
