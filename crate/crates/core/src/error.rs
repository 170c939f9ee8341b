use thiserror::Error;

/// Errors produced by the lattice solvers and the dense backend.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("ill-conditioned linear system (condition estimate {estimate:.3e})")]
    IllConditioned { estimate: f64 },

    #[error("reference energy lies on the PBC spectrum (distance {distance:.3e})")]
    OnSpectrum { distance: f64 },

    #[error("degenerate reference energy: {0}")]
    DegenerateReference(String),

    #[error("invalid reference energy: {0}")]
    InvalidReference(String),

    #[error("evaluation at a pole: {0}")]
    Pole(String),

    #[error("branch ambiguity in spectral flow at V0 = {v0:.6e}")]
    BranchAmbiguity { v0: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
