use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("hypergeometric series does not terminate: no numerator parameter is a non-positive integer")]
    DivergentSeries,
    #[error("denominator Pochhammer symbol vanishes at index {index} before the series terminates")]
    PoleInDenominator { index: usize },
    #[error("cannot add √π-tagged scalars with powers {left} and {right}")]
    PiPowerMismatch { left: i32, right: i32 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not nilpotent of order {0}")]
    NotNilpotent(usize),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("block moment matrix is singular at pivot {pivot}")]
    SingularMomentMatrix { pivot: usize },
    #[error("Rodrigues quotient is not a monic polynomial of degree {degree}")]
    NonPolynomialResult { degree: usize },
    #[error("tridiagonal eigensolver did not converge for eigenvalue {0}")]
    EigenFailure(usize),
    #[error("quadrature with {nodes} nodes cannot resolve degree {degree}")]
    UnderResolved { nodes: usize, degree: usize },
    #[error("quadrature sanity check failed: {0}")]
    QuadratureUnderResolved(String),
    #[error("integration step rejected at t = {t}: {reason}")]
    StepRejected { t: f64, reason: String },
    #[error("cannot parse rational from {0:?}")]
    ParseRational(String),
}

pub type Result<T> = std::result::Result<T, Error>;
