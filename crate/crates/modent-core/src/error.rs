//! Error taxonomy shared by the whole crate.
//!
//! Numerical routines distinguish structural problems (dimension mismatches,
//! invalid input data) from conditioning problems discovered at runtime.
//! Infinite entropy is *not* an error: it is a legitimate result and is
//! reported through [`crate::modular::EntropyValue`].

use thiserror::Error;

/// Everything that can go wrong outside of a plain panic.
#[derive(Debug, Error)]
pub enum Error {
    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    /// A direct sum was requested over summands with incompatible metadata.
    #[error("invalid direct-sum summand: {0}")]
    InvalidSummand(String),

    /// The compatibility bound fails: the operator norm of D exceeds 1.
    #[error("|D| exceeds 1 by more than the tolerance (norm = {norm:.6e})")]
    NormViolation { norm: f64 },

    /// ker D has odd dimension and automatic padding was disabled.
    #[error("ker D is odd-dimensional ({dim}) and auto-padding is disabled")]
    OddKernel { dim: usize },

    /// A vector that must lie in the embedded base space K+0 does not.
    #[error("vector has a component outside the base space (residual {residual:.3e})")]
    NotInBaseSpace { residual: f64 },

    /// A basis or Gram matrix is numerically singular beyond the allowed bound.
    #[error("ill-conditioned {what}: condition number {cond:.3e} exceeds {max:.3e}")]
    IllConditioned {
        what: &'static str,
        cond: f64,
        max: f64,
    },

    /// The four-way decomposition failed to produce complementary pieces.
    #[error("degenerate decomposition: {0}")]
    DegenerateDecomposition(String),

    /// Spectral calculus hit a singular point of the function being applied.
    #[error("spectral singularity: eigenvalue {eigenvalue:.12e} within {tol:.1e} of {point}")]
    SpectralSingularity {
        eigenvalue: f64,
        point: f64,
        tol: f64,
    },

    /// An operation that requires a finite-entropy vector met an L-infinity
    /// component.
    #[error("vector has a component on the purely infinite part (relative size {relative:.3e})")]
    InfiniteComponent { relative: f64 },

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature failed to converge: estimate {estimate:.6e}, error {error:.3e} > {tol:.3e}")]
    QuadratureFailure {
        estimate: f64,
        error: f64,
        tol: f64,
    },

    /// A family whose monotonicity was to be attested fails a sampled
    /// inclusion check.
    #[error("family is not increasing: the subspace at {s:.6} leaves the subspace at {t:.6} (relative residual {residual:.3e})")]
    NotIncreasing { s: f64, t: f64, residual: f64 },

    /// A finite-difference stencil left the family's domain.
    #[error("stencil [{lo:.6}, {hi:.6}] leaves the family domain [{dom_lo:.6}, {dom_hi:.6}]")]
    StencilOutOfDomain {
        lo: f64,
        hi: f64,
        dom_lo: f64,
        dom_hi: f64,
    },

    /// A finite-difference stencil straddles a detected discontinuity.
    #[error("stencil at t = {t:.6} straddles a jump (increment {increment:.3e} > {threshold:.3e})")]
    StencilStraddlesJump {
        t: f64,
        increment: f64,
        threshold: f64,
    },

    /// Entropy is infinite somewhere on a stencil, so derivatives are undefined.
    #[error("entropy is infinite on the stencil at t = {t:.6}")]
    InfiniteOnStencil { t: f64 },

    /// A model was asked for data it cannot provide.
    #[error("unsupported operation for this model: {0}")]
    Unsupported(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
