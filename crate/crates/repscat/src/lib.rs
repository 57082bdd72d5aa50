//! Stationary scattering toolkit for repulsive Schrödinger operators
//! `H = ½p² − ½|x|^α + q` with `0 < α < 2`.
//!
//! The crate computes limiting resolvents `R(λ ± i0)`, stationary wave
//! matrices, the scattering matrix `S(λ)` and generalized eigenfunctions on
//! the line and in radial channels, and ships independent oracles (Airy
//! functions, high-order ODE shooting) to check them against.

pub mod discretization;
pub mod geometry_phase;
pub mod numerics;
pub mod oracle;
pub mod resolvent;
pub mod scattering;

pub use num_complex::Complex64;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("branch cut: {0}")]
    BranchCut(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("did not converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Sign of the limiting resolvent: `+` outgoing, `−` incoming.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}
