use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// An inner iteration (e.g. inverse digamma) ran out of iterations.
    #[error("{what} did not converge after {iterations} iterations (last iterate {last})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        last: f64,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// All observations equal, or the sample statistics admit no finite shape estimate.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// The posterior over the shape has no positive mode.
    #[error("ill-posed posterior: {0}")]
    IllPosedPosterior(String),

    /// An internal numerical identity was violated.
    #[error("numerical anomaly: {0}")]
    NumericalAnomaly(String),

    #[error("invalid input at row {row}: {message}")]
    InvalidRow { row: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
