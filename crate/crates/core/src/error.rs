use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record in {location}: {message}")]
    Malformed { location: String, message: String },

    #[error("inconsistent channel lengths in demonstration '{id}': {detail}")]
    InconsistentChannels { id: String, detail: String },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("demonstration '{id}' has no channel named '{channel}'")]
    MissingChannel { id: String, channel: String },

    #[error("invalid trajectory '{id}': {reason}")]
    InvalidTrajectory { id: String, reason: String },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("truncation level mismatch: {0} vs {1}")]
    LevelMismatch(usize, usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("element budget exceeded: {required} elements requested, budget is {budget}")]
    ElementBudget { required: u128, budget: u128 },

    #[error(
        "non-finite kernel value ({context}); path scale too large, consider a smaller prescale"
    )]
    NonFinite { context: String },

    #[error("kernel evaluation failed for pair ({left}, {right}): {source}")]
    Pair {
        left: String,
        right: String,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid Gram matrix: {0}")]
    InvalidGram(String),

    #[error("Gram matrix is not normalized")]
    NotNormalized,

    #[error("Gram matrix has eigenvalue {0:e}, below the PSD tolerance")]
    NotPsd(f64),

    #[error("invalid subset: {0}")]
    InvalidSubset(String),

    #[error("budget m = {m} exceeds dataset size n = {n}")]
    BudgetTooLarge { m: usize, n: usize },

    #[error("enumeration of C({n}, {m}) = {count} subsets exceeds the limit of {limit}")]
    CombinatorialBudget {
        n: usize,
        m: usize,
        count: u128,
        limit: u128,
    },

    #[error("m-DPP sampling degenerated: residual basis norm {0:e}")]
    DegenerateBasis(f64),

    #[error("cache file {path}: {reason}")]
    Cache { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
