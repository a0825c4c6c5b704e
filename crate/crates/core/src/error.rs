use thiserror::Error;

/// Errors raised by the numerical layers.
///
/// Every numeric failure carries the parameters that triggered it so the
/// CLI can report them verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("polynomial does not vanish at angle {angle}: |p(lambda)| = {residual:e}")]
    NotARoot { angle: f64, residual: f64 },

    #[error("nodes at angles {first} and {second} coincide")]
    DuplicateNodes { first: f64, second: f64 },

    #[error("length mismatch: {nodes} nodes but {values} values")]
    LengthMismatch { nodes: usize, values: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("point {re} + {im}i lies outside the open unit disk (|z| = {modulus})")]
    OutsideDisk { re: f64, im: f64, modulus: f64 },

    #[error("alpha must be positive, got {0}")]
    NonPositiveAlpha(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e}")]
    QuadratureNotConverged { estimate: f64, error: f64 },

    #[error("Cholesky factorization failed at pivot {pivot} (value {value:e})")]
    SolveFailed { pivot: usize, value: f64 },

    #[error("direction at angle {angle} coincides with an atom of mu")]
    AtomDirection { angle: f64 },
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNotConverged { .. } | Error::SolveFailed { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
