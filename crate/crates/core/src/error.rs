//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input violates a documented contract (e.g. non-symmetric tensor).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Argument outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A diffraction order sits on its threshold, where κ_m = 0.
    #[error("diffraction order ({mx}, {my}) is at threshold (| |k∥+q| - k | / k = {offset:.3e})")]
    ThresholdDegeneracy { mx: i64, my: i64, offset: f64 },

    /// Series acceleration did not reach the requested tolerance.
    #[error("lattice sum did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    ConvergenceFailure {
        achieved: f64,
        requested: f64,
        sequence: Vec<f64>,
    },

    /// Two independent evaluations of the same quantity disagree.
    #[error("consistency check failed: discrepancy {discrepancy:.3e} exceeds {limit:.3e}")]
    ConsistencyFailure { discrepancy: f64, limit: f64 },

    /// Operation requested outside the diffraction regime it supports.
    #[error("wrong regime: {0}")]
    WrongRegime(String),

    /// The effective polarizability bracket is not invertible.
    #[error("singular response: {0}")]
    SingularResponse(String),

    /// Dense solver size guard.
    #[error("{sites} sites exceed the dense-solver limit of {limit}; tiled or iterative solvers are not provided")]
    SizeGuard { sites: usize, limit: usize },

    /// A documented precondition does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
