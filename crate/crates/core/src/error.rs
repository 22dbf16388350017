use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("unparsable value {value:?} at row {row}, column {column} ({name})")]
    Parse {
        row: usize,
        column: usize,
        name: String,
        value: String,
    },

    #[error("label column {0} not found")]
    UnknownLabelColumn(String),

    #[error("dataset has a single class; classification is undefined")]
    SingleClass,

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("row {row} has {found} features, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("label {label} out of range for {num_classes} classes")]
    LabelOutOfRange { label: usize, num_classes: usize },

    #[error("cannot split {n} items into {k} folds")]
    InvalidFolds { n: usize, k: usize },

    #[error("class counts do not add up: {0}")]
    CountMismatch(String),

    #[error("invalid class posterior: {0}")]
    InvalidPosterior(String),

    #[error("confidence level {p0} must lie in ({p_min}, 1]")]
    InvalidConfidence { p0: f64, p_min: f64 },

    #[error("need at least two classes, got {0}")]
    TooFewClasses(usize),

    #[error("length mismatch: {0} posteriors vs {1} labels")]
    LengthMismatch(usize, usize),

    #[error("need at least two folds to summarise, got {0}")]
    TooFewFolds(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed tree text at line {line}: {reason}")]
    TreeFormat { line: usize, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
