use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("series did not converge within {terms} terms")]
    NonConvergence { terms: usize },

    #[error("quadrature tolerance not reached: estimate {value:e}, error {error:e}")]
    Accuracy { value: f64, error: f64 },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("singular point at r = {r}")]
    SingularPoint { r: f64 },

    #[error("r = {r} lies within the node guard of sin(kr)")]
    NodeProximity { r: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("modulating function overflows at r = {r} (ln f = {log_f:e})")]
    Growth { r: f64, log_f: f64 },

    #[error("non-finite result: {0}")]
    NonFinite(String),

    #[error("grid is not uniform")]
    NonUniformGrid,

    #[error("insufficient data: {found} envelope points, need {needed}")]
    InsufficientData { found: usize, needed: usize },

    #[error("at grid point {index}: {source}")]
    AtPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, index: usize) -> Self {
        Error::AtPoint {
            index,
            source: Box::new(self),
        }
    }
}
