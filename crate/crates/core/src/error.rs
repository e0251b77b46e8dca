use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient sample for nested bipartition: n = {0}, need at least 8")]
    InsufficientSample(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty index set")]
    EmptyIndexSet,

    #[error("propensity degenerate: {0}")]
    PropensityDegenerate(String),

    #[error("outcome fit infeasible: {0}")]
    OutcomeFit(String),

    #[error("spline basis: {0}")]
    Spline(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("{0}")]
    Csv(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable code, used in CLI error objects.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InsufficientSample(_) => "insufficient_sample",
            Error::Domain(_) => "domain",
            Error::EmptyIndexSet => "empty_index_set",
            Error::PropensityDegenerate(_) => "propensity_degenerate",
            Error::OutcomeFit(_) => "outcome_fit",
            Error::Spline(_) => "spline",
            Error::Config(_) => "config",
            Error::InvalidData(_) => "invalid_data",
            Error::Csv(_) => "csv",
            Error::UnknownScenario(_) => "unknown_scenario",
            Error::UnknownMethod(_) => "unknown_method",
            Error::Io(_) => "io",
        }
    }
}
