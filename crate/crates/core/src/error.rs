use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },

    #[error("unknown {kind} label `{label}`")]
    UnknownLabel { kind: &'static str, label: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("projection needs at least {required} {kind}, got {got}")]
    TooFew {
        kind: &'static str,
        required: usize,
        got: usize,
    },

    #[error("pairwise outcomes are intransitive: no rank vector reproduces them")]
    Intransitive,

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty point set: {0}")]
    EmptySet(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("constant data: f_max equals f_min ({0})")]
    Degenerate(f64),

    #[error("trace point {index} is not part of the objective sample")]
    PointNotSampled { index: usize },

    #[error("metric `{metric}` needs context field `{field}`")]
    MissingContext { metric: String, field: &'static str },

    #[error("unknown metric id `{0}`")]
    UnknownMetric(String),

    #[error("unknown method id `{0}`")]
    UnknownMethod(String),

    #[error("metric `{metric}` failed under transform `{transform}`: {source}")]
    UnderTransform {
        metric: String,
        transform: String,
        #[source]
        source: Box<Error>,
    },

    #[error("trace values contain duplicates (index {first} and {second}); perturbation audit needs strictly ordered values")]
    DuplicateTraceValues { first: usize, second: usize },

    #[error("transform `{transform}` is not valid for value {value}")]
    TransformDomain { transform: String, value: f64 },

    #[error("comparison graph is not strongly connected; strengths are not identifiable")]
    Disconnected,

    #[error("win matrix has no decisive comparisons")]
    NoComparisons,

    #[error("label `{0}` was dropped from the fit as degenerate")]
    DroppedLabel(String),

    #[error("method `{method}` failed on subset [{subset}]: {source}")]
    OnSubset {
        method: String,
        subset: String,
        #[source]
        source: Box<Error>,
    },

    #[error("optimizer `{0}` is not comparison-based")]
    NotComparisonBased(String),

    #[error("unknown optimizer `{0}`")]
    UnknownOptimizer(String),

    #[error("unknown objective `{0}`")]
    UnknownObjective(String),

    #[error("objective returned a non-finite value at evaluation {0}")]
    EvaluatorFailure(usize),

    #[error("augmentation source has no objective registry")]
    NoObjectiveRegistry,

    #[error("report schema mismatch: {0}")]
    Schema(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
