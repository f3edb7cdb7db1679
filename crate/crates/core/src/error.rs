use thiserror::Error;

/// Errors raised by the numerical engines and the physical models built on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no convergence in {what}: estimate {estimate:e}, error {error:e}")]
    NonConvergence {
        what: &'static str,
        estimate: f64,
        error: f64,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("singular matrix: pivot {pivot} underflows")]
    SingularMatrix { pivot: usize },
    #[error("spectral radius bound {bound} is not below 1")]
    SpectralRadiusExceeded { bound: f64 },
    #[error("ideal conductor has no finite permittivity; use the ideal reflection limit")]
    IdealLimitRequested,
    #[error("degenerate point: omega = k = 0")]
    DegeneratePoint,
    #[error("model evaluated outside its validity range: {0}")]
    OutsideValidity(&'static str),
    #[error("collocation system ill-conditioned (condition number {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("boundary residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
