use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degree {degree} exceeds the cap {cap}")]
    DegreeCap { degree: u32, cap: i64 },

    #[error("cannot add polynomials carrying (2πi)^{left} and (2πi)^{right}")]
    TauMismatch { left: i32, right: i32 },

    #[error("variable count mismatch: {left} vs {right}")]
    NvarsMismatch { left: usize, right: usize },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not generically surjective ({trials} trials, seed {seed})")]
    GenericSurjectivity { trials: usize, seed: u64 },

    #[error("complex invariant violated: {0}")]
    ComplexInvariant(String),

    #[error("form is not closed under contraction with ζ − z")]
    NotClosed,

    #[error("degree-capped linear system has no solution: {0}")]
    Infeasible(String),

    #[error("bound method not applicable: {0}")]
    Applicability(String),

    #[error("no solution within degree cap {cap}")]
    NoSolutionAtCap { cap: i64 },

    #[error("certificate failed: {0}")]
    Failure(String),

    #[error("matrix drops rank on the quadrature grid (min weighted norm {min_norm:e})")]
    RankDropOnGrid { min_norm: f64 },

    #[error("quadrature did not reach tolerance {tolerance:e} (estimate {estimate:e} at resolution {resolution})")]
    ToleranceNotReached {
        tolerance: f64,
        estimate: f64,
        resolution: usize,
    },

    #[error("internal invariant broken: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
