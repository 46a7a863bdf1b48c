//! Crate-wide error type.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Why a plant failed the standing assumption (controllability and
/// nonsingular dynamics).
#[derive(Debug, Clone, PartialEq)]
pub enum AssumptionFailure {
    /// The controllability matrix `[B, AB, …, A^{n-1}B]` is rank deficient.
    Uncontrollable { rank: usize, dim: usize },
    /// `A` is singular (or numerically indistinguishable from singular).
    SingularDynamics { det: f64 },
}

impl std::fmt::Display for AssumptionFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AssumptionFailure::Uncontrollable { rank, dim } => {
                write!(f, "pair (A, B) is not controllable: rank {rank} < {dim}")
            }
            AssumptionFailure::SingularDynamics { det } => {
                write!(f, "matrix A is singular (det = {det:.3e})")
            }
        }
    }
}

/// Errors produced by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed construction data (dimensions, signs, ranges).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The plant violates the standing assumption.
    #[error("assumption violated: {0}")]
    Assumption(AssumptionFailure),

    /// The target state is outside the discretized reachable set. The
    /// attached phase-1 residual distinguishes "barely outside" from
    /// "far outside".
    #[error("infeasible: state not reachable (phase-1 residual {phase1_residual:.6e})")]
    Infeasible { phase1_residual: f64 },

    /// A numerical method failed (overflow, vanishing pivot, lost basis).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A scalar initial state lies outside the closed-form reachable
    /// interval `[-reach, reach]`.
    #[error("state {xi} outside the reachable interval [-{reach}, {reach}]")]
    OutOfReach { xi: f64, reach: f64 },
}
