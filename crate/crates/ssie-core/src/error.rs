use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sample proportion is undefined for an empty sample (N = 0)")]
    UndefinedProportion,

    #[error("underprediction metric is undefined when the actual rate is zero")]
    UndefinedMetric,

    #[error("bias ratio is singular: the majority deviation vanishes (S1 = {s1})")]
    SingularRatio { s1: f64 },

    #[error("degenerate power-law fit: {0}")]
    DegenerateFit(String),

    #[error("degenerate group feature: {0}")]
    DegenerateGroup(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Data,
    Numerical,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidArgument(_) => ErrorCategory::Usage,
            Error::Schema(_) | Error::Data(_) | Error::Io(_) => ErrorCategory::Data,
            Error::UndefinedProportion
            | Error::UndefinedMetric
            | Error::SingularRatio { .. }
            | Error::DegenerateFit(_)
            | Error::DegenerateGroup(_) => ErrorCategory::Numerical,
        }
    }
}
