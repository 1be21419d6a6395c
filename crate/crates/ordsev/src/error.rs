//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // schema and configuration
    #[error("schema: outcome needs at least two classes")]
    TooFewOutcomeClasses,
    #[error("schema: duplicate outcome class `{0}`")]
    DuplicateOutcomeClass(String),
    #[error("schema: duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("schema: variable `{variable}`: duplicate category `{category}`")]
    DuplicateCategory { variable: String, category: String },
    #[error("schema: variable `{variable}`: base category `{base}` is not among its categories")]
    BaseNotInCategories { variable: String, base: String },
    #[error("schema: variable `{variable}`: selected category `{category}` must be a declared non-base category")]
    InvalidSelection { variable: String, category: String },
    #[error("schema: malformed schema text: {0}")]
    MalformedSchema(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown design column `{0}`")]
    UnknownColumn(String),

    // ingestion
    #[error("input is missing required column `{0}`")]
    MissingColumn(String),
    #[error("input stream is empty")]
    EmptyInput,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    // contingency tables
    #[error("contingency table has zero grand total")]
    ZeroGrandTotal,
    #[error("expected count is zero in cell ({row}, {col})")]
    ZeroExpectedCell { row: usize, col: usize },
    #[error("contingency table must be at least 2x2, got {rows}x{cols}")]
    DegenerateTable { rows: usize, cols: usize },

    // model estimation
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cut-off points must be strictly increasing and finite")]
    NonIncreasingCutoffs,
    #[error("outcome class `{0}` has no observations")]
    MissingOutcomeClass(String),
    #[error("{got} observations are too few to estimate {params} parameters")]
    TooFewObservations { got: usize, params: usize },
    #[error("Hessian is singular at the reported optimum")]
    SingularHessian,
    #[error("covariance matrix is unavailable for this fit")]
    CovarianceUnavailable,
    #[error("variance of `{0}` is negative")]
    NegativeVariance(String),
    #[error("fitted log-likelihood {fit_ll} is below the null log-likelihood {null_ll}")]
    FitBelowNull { fit_ll: f64, null_ll: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    // data generation
    #[error("generator spec: {0}")]
    InvalidGeneratorSpec(String),
    #[error("{combinations} category combinations exceed the enumeration limit of {limit}")]
    EnumerationLimit { combinations: u128, limit: u64 },

    // fit archive
    #[error("fit archive was produced under a different schema (archive hash {archive}, schema hash {schema})")]
    SchemaHashMismatch { archive: String, schema: String },
    #[error("malformed fit archive: {0}")]
    MalformedArchive(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True when the error signals a numerical failure rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularHessian
                | Error::CovarianceUnavailable
                | Error::NegativeVariance(_)
                | Error::FitBelowNull { .. }
        )
    }
}
