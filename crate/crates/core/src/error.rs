use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid size {n}: must be even and at least 8")]
    InvalidGridSize { n: usize },

    #[error("grid size {n} must be divisible by 4 for the k -> 1/2 - k pairing")]
    GridNotDivisibleBy4 { n: usize },

    #[error("grid size mismatch: {left} vs {right}")]
    GridMismatch { left: usize, right: usize },

    #[error("invalid model parameter: {0}")]
    InvalidModel(String),

    #[error("operation not defined for the {kind} dispersion model")]
    UnsupportedModel { kind: &'static str },

    #[error(
        "Fermi property violated at grid index {index}: eigenvalue {value} \
         outside [0,1] beyond tolerance {tol}; consider reducing dt"
    )]
    FermiViolation { index: usize, value: f64, tol: f64 },

    #[error("state contains non-finite values")]
    NonFinite,

    #[error("state is not diagonal: off-diagonal magnitude {0}")]
    NotDiagonal(f64),

    #[error("eigenvalue {value} too close to 0 or 1: matrix logarithm undefined")]
    BoundaryEigenvalue { value: f64 },

    #[error("odd-trace profile value {0} outside the admissible range (-2, 2)")]
    InadmissibleProfile(f64),

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("target energy outside the admissible range for the given densities")]
    EnergyOutOfRange,

    #[error("fit is degenerate: infinite temperature (beta = 0)")]
    InfiniteTemperature,

    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),

    #[error("not enough records for the fit: have {have}, need {need}")]
    TooFewRecords { have: usize, need: usize },

    #[error("malformed snapshot file: {0}")]
    MalformedSnapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
