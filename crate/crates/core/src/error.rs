use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("eigensolver did not converge (off-diagonal residual {residual:e})")]
    NoConvergence { residual: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("element is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("certificate does not reproduce its element (deviation {deviation:e})")]
    CertificateMismatch { deviation: f64 },

    #[error("Kraus factor is not rank one (singular value ratio {ratio:e})")]
    NotRankOne { ratio: f64 },

    #[error("state space is empty: the unit is not an order unit for this presentation")]
    EmptyStateSpace,

    #[error("state space is unbounded: the unit is not an order unit for this presentation")]
    UnboundedStateSpace,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
