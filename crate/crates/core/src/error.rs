use thiserror::Error;

use crate::gf2::Basis;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("basis mismatch: {left:?} vs {right:?}")]
    BasisMismatch { left: Basis, right: Basis },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error("instance too large: {0}")]
    Size(String),
    #[error("lattice invariant violated: {0}")]
    Invariant(String),
    #[error("chain identity violated: {0}")]
    Identity(String),
    #[error("flux violates the Gauss law at {0} relation vertices")]
    InvalidFlux(usize),
    #[error("residual has nonzero stabilizer syndrome of weight {0}")]
    NonzeroSyndrome(usize),
    #[error("matching infeasible: {0}")]
    Infeasible(String),
    #[error("domain: {0}")]
    Domain(String),
    #[error("fit: {0}")]
    Fit(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
