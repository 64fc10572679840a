//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the numerical operations.
///
/// Non-convergence of iterative procedures is deliberately *not* an error:
/// optimizers and adaptive quadrature report a flag alongside their best
/// estimate instead.
#[derive(Debug, Error)]
pub enum Error {
    /// The exponential-moment integral diverges for this exponent.
    #[error("divergent integral: exponent {exponent} is at or below the threshold {threshold}")]
    DivergentIntegral { exponent: f64, threshold: f64 },

    /// Lattice generators are collinear (or one of them vanishes).
    #[error("degenerate lattice: generators are linearly dependent over the reals")]
    DegenerateLattice,

    /// A configuration contained the point at infinity where only finite
    /// points are meaningful (polynomial construction).
    #[error("unsupported root: the point at infinity cannot be a polynomial zero")]
    UnsupportedRoot,

    /// The query point is not a root of the polynomial within tolerance.
    #[error("not a root: |P(z)| = {residual:.3e} exceeds the gate {gate:.3e}")]
    NotARoot { residual: f64, gate: f64 },

    /// A quadrature grid is too coarse for the requested integrand.
    #[error("under-resolved grid: need at least {needed} angular nodes, grid has {actual}")]
    UnderResolvedGrid { needed: usize, actual: usize },

    /// Two poles of a bipolar Green function coincide.
    #[error("degenerate pole pair: the two poles coincide modulo the lattice")]
    DegeneratePolePair,

    /// Invalid argument outside the typed cases above.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Crate-wide result alias.
pub type Result<V> = std::result::Result<V, Error>;
