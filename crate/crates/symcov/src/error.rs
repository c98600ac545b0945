//! Error taxonomy shared across the crate.

use thiserror::Error;

/// Errors raised by group construction, structure analysis, sampling and
/// estimation.
#[derive(Debug, Error)]
pub enum Error {
    /// Group closure exceeded the configured element cap.
    #[error("group closure exceeded max_order = {max_order}")]
    ClosureOverflow {
        /// The configured cap that was exceeded.
        max_order: usize,
    },

    /// A matrix expected to be unitary failed the unitarity check.
    #[error("matrix is not unitary: deviation {deviation:e} exceeds tolerance {tolerance:e}")]
    NotUnitary {
        /// Frobenius norm of `UᴴU − I`.
        deviation: f64,
        /// Tolerance the check ran with.
        tolerance: f64,
    },

    /// A built-in group or structure is unavailable for the requested size.
    #[error("unsupported size for {kind}: p = {p}{detail}")]
    UnsupportedSize {
        /// Which built-in was requested.
        kind: String,
        /// The incompatible dimension.
        p: usize,
        /// Extra context, e.g. a divisibility requirement.
        detail: String,
    },

    /// Operands have incompatible dimensions.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimMismatch {
        /// Expected dimension.
        expected: usize,
        /// Actual dimension.
        actual: usize,
    },

    /// Eigenvalue clustering was ambiguous at the requested tolerance.
    #[error("degenerate spectrum: eigenvalue gap {gap:e} is ambiguous at tolerance {tolerance:e}; retry with a new seed")]
    DegenerateSpectrum {
        /// The ambiguous gap.
        gap: f64,
        /// Clustering tolerance.
        tolerance: f64,
    },

    /// Eigenspaces inside one isotypic component disagree in dimension.
    #[error("inconsistent multiplicity inside an isotypic component: found dimensions {found:?}")]
    InconsistentMultiplicity {
        /// The distinct eigenspace dimensions observed.
        found: Vec<usize>,
    },

    /// A matrix expected to be positive definite is not.
    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite {
        /// Smallest eigenvalue after symmetrization.
        min_eigenvalue: f64,
    },

    /// A vector expected to lie on the unit sphere does not.
    #[error("vector is not unit norm: |x| = {norm}")]
    NotUnitNorm {
        /// Euclidean norm found.
        norm: f64,
    },

    /// Too few samples for the estimator's existence condition.
    #[error(
        "insufficient samples: n = {n} does not satisfy n > {threshold} required by {estimator}"
    )]
    InsufficientSamples {
        /// Sample count provided.
        n: usize,
        /// The existence threshold (p for Tyler, delta(G)p for STyler).
        threshold: f64,
        /// Which estimator raised the gate.
        estimator: String,
    },

    /// A sample vector is identically zero.
    #[error("zero vector at sample index {index}")]
    ZeroVector {
        /// Offending sample index.
        index: usize,
    },

    /// A fixed-point denominator underflowed.
    #[error("numerical breakdown at iteration {iteration}: quadratic form {value:e}")]
    NumericalBreakdown {
        /// Iteration at which the breakdown occurred.
        iteration: usize,
        /// The offending denominator value.
        value: f64,
    },

    /// A matrix required to be G-invariant is not.
    #[error("matrix is not G-invariant: deviation {deviation:e} exceeds tolerance {tolerance:e}")]
    NotInvariant {
        /// Worst conjugation deviation over the group.
        deviation: f64,
        /// Tolerance the check ran with.
        tolerance: f64,
    },

    /// Invalid parameter outside the dedicated variants.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Crate-wide result alias.
pub type Result<V> = std::result::Result<V, Error>;
