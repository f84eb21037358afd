use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("representation lacks generator `{0}`")]
    MissingGenerator(String),

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("capacity exceeded: {what} needs {needed}, limit is {limit}")]
    Capacity {
        what: &'static str,
        needed: usize,
        limit: usize,
    },

    #[error("no stationary state with singular value below {tol:e}")]
    NoStationaryState { tol: f64 },

    #[error("degenerate state with trace {0:e}")]
    ZeroTrace(f64),

    #[error("ill-conditioned construction: {0}")]
    Conditioning(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }
}
