//! Concrete one-particle models with closed-form entropy oracles.
//!
//! Everything in this module is independent of the modular engine in the
//! crate root: entropies here come from explicit formulas or quadrature,
//! never from eigendecompositions of projected operators. That makes the
//! models usable as cross-checks for the engine and as fast backends for
//! the family scans.
//!
//! * [`probe`]: smooth test functions (bumps, ramps, sampled data) with
//!   exact derivatives.
//! * [`quad`]: adaptive Gauss-Kronrod quadrature used by the model
//!   integrals.
//! * [`u1`]: chiral current on the line in vacuum, thermal, and
//!   reparametrized-vacuum states; entropies and derivative splits in
//!   closed form up to one-dimensional integrals.
//! * [`oscillator`]: finite direct sums of oscillator modes with diagonal
//!   covariance; entropy is a weighted sum of inverse hyperbolic
//!   cotangents.
//! * [`abelian`]: degenerate (commutative) spaces where the symplectic
//!   form vanishes; entropy is a weighted sum of squared imaginary parts,
//!   plus a half-line continuum variant.
//! * [`discretize`]: finite-element discretization of the chiral current
//!   producing genuine [`SymplecticHilbertSpace`](crate::SymplecticHilbertSpace)
//!   instances whose engine entropies converge to the continuum formulas.

pub mod abelian;
pub mod discretize;
pub mod oscillator;
pub mod probe;
pub mod quad;
pub mod u1;

pub use abelian::{
    abelian_entropy, abelian_space, embed_complex_probe, halfline_entropy, halfline_tf,
    y_subspace_generators,
};
pub use discretize::{discretize_u1, DiscretizedCurrent};
pub use oscillator::{
    arcoth, oscillator_entropy, oscillator_space, spectral_entropy, spectral_generators,
    spectral_tf,
};
pub use probe::SmoothProbe;
pub use quad::{integrate, integrate_with_breaks, QuadratureParams};
pub use u1::{
    entropy as u1_entropy, second_derivative_terms, tf as u1_tf, Reparam, U1State,
};
