use thiserror::Error;

use crate::family::StateLabel;

/// Errors produced by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{n} qubits exceeds the dense cap of {cap}; use the sparse representation")]
    SizeLimit { n: usize, cap: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid qubit subset: {0}")]
    InvalidSubset(String),

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("construction mismatch: {what} (deviation {deviation:e})")]
    Construction { what: String, deviation: f64 },

    #[error("missing parent state {0}")]
    MissingParent(StateLabel),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
