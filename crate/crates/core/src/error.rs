use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}, row {row}, column `{column}`: cannot parse `{value}` as a finite number")]
    NonNumeric {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("label column `{0}` not present in header")]
    MissingLabelColumn(String),

    #[error("dataset has no ground-truth labels")]
    MissingLabels,

    #[error("operation needs at least {needed} points, dataset has {actual}")]
    TooFewPoints { needed: usize, actual: usize },

    #[error("kappa = {kappa} outside [0, {max}]")]
    KappaOutOfRange { kappa: f64, max: f64 },

    #[error("invalid constraint set: {0}")]
    InvalidConstraints(String),

    #[error("constraint file line {line}: {msg}")]
    ConstraintSyntax { line: usize, msg: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("tree of depth {depth} has {leaves} leaves, cannot host {k} non-empty clusters")]
    ShapeTooShallow { depth: u32, leaves: usize, k: usize },

    #[error("distance classing is empty")]
    EmptyClassing,

    #[error("constraints are inconsistent; nothing to encode")]
    InfeasibleConstraints,

    #[error("instance too large for exhaustive enumeration: {0}")]
    InstanceTooLarge(String),

    #[error("solver binary not found: {0}")]
    SolverMissing(String),

    #[error("cannot parse solver output: {0}")]
    SolverOutput(String),

    #[error("solver model failed verification: {0}")]
    ModelVerification(String),

    #[error("model is inconsistent with the encoding: {0}")]
    CorruptModel(String),

    #[error("solution failed verification: {0}")]
    VerificationFailed(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
