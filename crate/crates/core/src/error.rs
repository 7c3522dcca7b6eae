use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("empty input: no data lines")]
    EmptyInput,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("undefined projection: null-space direction has zero norm")]
    UndefinedProjection,

    #[error("inconsistent inputs: {0}")]
    InconsistentInputs(String),

    #[error("infeasible dual point: {0}")]
    InfeasibleTheta(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("oracle dimension {n} exceeds cap {cap}")]
    OracleTooLarge { n: usize, cap: usize },

    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// An I/O failure on `path`.
    pub fn file(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::File {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
