//! Crate-wide error type.

use crate::opspace::DecompositionWitness;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("input not Hermitian within tolerance (asymmetry {asymmetry:.3e} > {tol:.3e})")]
    NotHermitian { asymmetry: f64, tol: f64 },

    #[error("basis is not linearly independent (gram eigenvalue ratio {0:.3e})")]
    DependentBasis(f64),

    #[error("gram matrix numerically singular: basis collapsed")]
    SingularGram,

    #[error("fixed-point iteration did not converge: {0}")]
    NonConvergence(String),

    /// The sum-norm solver hit its iteration cap; the best witness found so
    /// far rides along so callers can still inspect it.
    #[error("sum-norm solver hit iteration cap at value {value:.6e}")]
    SumNormStalled {
        value: f64,
        witness: Box<DecompositionWitness>,
    },

    #[error("oracle cap exceeded: {0}")]
    OracleCap(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),
}

pub type Result<T> = std::result::Result<T, Error>;
