use thiserror::Error;

/// Errors raised by lattice construction, series evaluation and product lookup.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("basis is not oriented: Im(conj(omega1) * omega2) = {area} must be positive")]
    NonOrientedBasis { area: f64 },

    #[error("scale factor must be nonzero")]
    ZeroScale,

    #[error("base change matrix has determinant {det}, expected 1")]
    DeterminantNotOne { det: i64 },

    #[error("negative radius {0}")]
    NegativeRadius(f64),

    #[error("enumeration needs more than {max} lattice points")]
    TooManyPoints { max: usize },

    #[error("no finite tail bound for exponents (m, n) = ({m}, {n})")]
    UnboundedTail { m: i32, n: i32 },

    #[error("{0}")]
    InvalidIndex(String),

    #[error("q-series needs |q| < 1, got |q| = {0}")]
    QSeriesDivergent(f64),

    #[error("convergence budget exhausted: {0}")]
    Budget(String),

    #[error("input string is not composable at position {position}")]
    NonComposable { position: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
