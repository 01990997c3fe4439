//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot open {path}: {source}")]
    FileAccess {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("non-numeric feature cell '{value}' at data row {row}, column '{column}'")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("missing value at data row {row}, column '{column}'")]
    MissingValue { row: usize, column: String },
    #[error("non-binary target: found {found} distinct labels in column '{column}'")]
    NonBinaryTarget { column: String, found: usize },
    #[error("target column '{0}' not found in header")]
    MissingTargetColumn(String),
    #[error("duplicate feature name '{0}'")]
    DuplicateFeatureName(String),
    #[error("class {class} has {count} members, too few for {folds} folds")]
    ClassTooSmall {
        class: u8,
        count: usize,
        folds: usize,
    },
    #[error("unknown feature name '{0}' in importance file")]
    UnknownFeature(String),
    #[error("importance file is missing feature '{0}'")]
    MissingFeature(String),
    #[error("dissimilarity of two empty sets is undefined")]
    EmptySets,
    #[error("selection has cardinality {got}, expected {expected}")]
    CardinalityMismatch { got: usize, expected: usize },
    #[error("selection violates the FCBF predominance constraint for features {0} and {1}")]
    ForbiddenPairViolated(usize, usize),
    #[error("negative feature quality {value} at index {index}")]
    NegativeQuality { index: usize, value: f64 },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("degenerate split: class {0} absent from the {1} part")]
    DegenerateSplit(u8, &'static str),
    #[error("all slots infeasible and no fill value given")]
    AllInfeasible,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("oracle failure: {0}")]
    Oracle(String),
    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
