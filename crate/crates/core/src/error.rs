use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("column {0} of the design is identically zero")]
    ZeroColumn(usize),

    #[error("generated column {0} is numerically zero, resample the design")]
    DegenerateColumn(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rho is not a subgradient of the l1 norm at w (coordinate {0})")]
    InvalidSubgradient(usize),

    #[error("no convergence after {iters} iterations (residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("at lambda = {lambda}: {source}")]
    AtLambda { lambda: f64, source: Box<Error> },

    #[error("at grid cell (lambda1 = {lambda1}, second = {second:?}): {source}")]
    AtGridCell {
        lambda1: f64,
        second: Option<f64>,
        source: Box<Error>,
    },

    #[error("brute-force oracle handles at most 6 columns, got {0}")]
    TooLarge(usize),

    #[error("no sign pattern satisfies the Lasso KKT conditions")]
    NoKktPoint,

    #[error("closed forms disagree at coordinate {index}: {left} vs {right}")]
    InternalMismatch { index: usize, left: f64, right: f64 },

    #[error("X beta_star is zero, the signal-to-noise ratio is undefined")]
    ZeroSignal,

    #[error("{path}: parse error at line {line}, column {col}: {msg}")]
    Parse {
        path: PathBuf,
        line: u64,
        col: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numerical routine, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NoConvergence { .. }
            | Error::NoKktPoint
            | Error::InternalMismatch { .. }
            | Error::DegenerateColumn(_) => true,
            Error::AtLambda { source, .. } | Error::AtGridCell { source, .. } => {
                source.is_numerical()
            }
            _ => false,
        }
    }

    pub(crate) fn at_lambda(self, lambda: f64) -> Error {
        Error::AtLambda {
            lambda,
            source: Box::new(self),
        }
    }
}
