use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("incomplete log: {0}")]
    IncompleteLog(String),

    #[error("analysis window [{t_b}, {t_e}] not covered: {reason}")]
    Window { t_b: f64, t_e: f64, reason: String },

    #[error("empty cohort")]
    EmptyCohort,

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("row {row}: {msg}")]
    Parse { row: usize, msg: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::NonFinite(_) => "non_finite",
            Error::IncompleteLog(_) => "incomplete_log",
            Error::Window { .. } => "window",
            Error::EmptyCohort => "empty_cohort",
            Error::MissingColumn(_) => "missing_column",
            Error::Parse { .. } => "parse",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
