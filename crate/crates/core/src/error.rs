use thiserror::Error;

/// Errors produced by score ingestion, distribution estimation, and metric
/// computation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: u64, reason: String },

    #[error("line {line}: unknown kind {value:?} (expected \"genuine\" or \"impostor\")")]
    UnknownKind { line: u64, value: String },

    #[error("line {line}: score is not finite")]
    NonFiniteScore { line: u64 },

    #[error("input contains no score records")]
    EmptyFile,

    #[error("empty input: {context}")]
    EmptyInput { context: &'static str },

    #[error("group key is empty")]
    EmptyGroup,

    #[error("score {value} outside grid range [{lo}, {hi}] and clamping is disabled")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("distributions are defined on different bin grids")]
    GridMismatch,

    #[error("invalid bin grid: {reason}")]
    InvalidGrid { reason: String },

    #[error("split leaves a piece with mass {mass:.3e} below {eps:.3e}; nothing to compare")]
    DegenerateTail { mass: f64, eps: f64 },

    #[error("fairness is undefined for {k} group(s); at least 2 required")]
    KTooSmall { k: usize },

    #[error("group {group:?} has an undefined {which} rate (empty cell)")]
    UndefinedRate { group: String, which: &'static str },

    #[error("all {which} rates are zero; Gini aggregation is undefined")]
    ZeroMeanRate { which: &'static str },

    #[error("target FMR {target} is unachievable on the given impostor set")]
    Unachievable { target: f64 },

    #[error("invalid scenario spec: {reason}")]
    InvalidSpec { reason: String },

    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
