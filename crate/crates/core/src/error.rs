use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("gamma function pole at {0}")]
    Pole(f64),

    #[error("argument {value} outside domain: {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series or quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("x = y is a singular point of the occupation density")]
    Singularity,

    #[error("operation needs a C^2 function but the evaluator is tagged {0:?}")]
    Smoothness(crate::function::Smoothness),

    #[error("kernel order class mismatch: expected {expected:?}, got {got:?}")]
    OrderClass {
        expected: crate::generators::OrderClass,
        got: crate::generators::OrderClass,
    },

    #[error("projection queried with a zero jump")]
    DegenerateJump,

    #[error("jump density {density} exceeds majorant {majorant} at state {state}, jump {jump}")]
    MajorantViolation {
        state: f64,
        jump: f64,
        density: f64,
        majorant: f64,
    },

    #[error("{fraction} of paths were censored at the time cap (threshold {threshold})")]
    Censored { fraction: f64, threshold: f64 },

    #[error("linear system is singular or ill-conditioned: {0}")]
    SingularSystem(String),

    #[error("boundary mismatch: {0}")]
    BoundaryMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
