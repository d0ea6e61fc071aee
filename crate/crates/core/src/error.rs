use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Tuning knobs that cannot be used together.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no data")]
    NoData,

    /// The data cannot be fitted by the requested family.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("line {line}: cannot parse {text:?} as a number")]
    Parse { line: usize, text: String },

    /// Every weight of a Dirichlet process draw vanished, even after a retry.
    #[error("numeric degeneracy: all weights underflowed (a = {a}, N = {truncation})")]
    Degenerate { a: f64, truncation: usize },

    /// A root finder or minimizer ran out of iterations.
    #[error("no convergence after {iterations} iterations (best value {best_value:e} at {best_point:?})")]
    NoConvergence {
        iterations: usize,
        best_value: f64,
        best_point: Vec<f64>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
