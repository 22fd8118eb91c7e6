use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("target column `{0}` not found in header")]
    MissingTarget(String),

    #[error("no usable rows after dropping rows with missing values")]
    NoUsableRows,

    #[error("target column must be binary, found {0} distinct classes")]
    NonBinaryTarget(usize),

    #[error("column `{column}` is not numeric and cannot be treated as continuous")]
    NotNumeric { column: String },

    #[error("feature `{0}` is constant and cannot be partitioned")]
    ConstantFeature(String),

    #[error("feature index {index} out of range (dataset has {n_features} features)")]
    FeatureOutOfRange { index: usize, n_features: usize },

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("feature `{0}` listed more than once")]
    DuplicateFeature(String),

    #[error("value {value} of feature `{feature}` lies in neither partition category")]
    ValueOutsidePartition { feature: String, value: f64 },

    #[error("temporal order violates frequency ordering: p({earlier})={p_earlier:.4} <= p({later})={p_later:.4}")]
    OrderViolation {
        earlier: String,
        later: String,
        p_earlier: f64,
        p_later: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("training target contains a single class")]
    SingleClass,

    #[error("non-finite value in feature `{0}`")]
    NonFinite(String),

    #[error("swap ratio {0} outside (0, 1]")]
    InvalidRatio(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("reweighing cell (group={group}, class={class}) is empty")]
    EmptyCell { group: &'static str, class: u8 },

    #[error("stage `{stage}`: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| match e {
            staged @ Error::Stage { .. } => staged,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        })
    }
}
