//! Entropy of standard subspaces in finite-dimensional symplectic Hilbert
//! spaces.
//!
//! The crate implements, numerically and in closed form, the one-particle
//! modular machinery behind relative entropy of coherent states:
//!
//! * [`space`] — real spaces `(K, tau, sigma)` with the compatibility bound
//!   `sigma(f,g)^2 <= tau(f,f) tau(g,g)`, validation, direct sums;
//! * [`purify`] — the doubling `K+ = K (+) K` with complex structure `i+`;
//! * [`subspace`] — spans, intersections, symplectic complements, and the
//!   four-way splitting of `K+` induced by a subspace `L` (nonseparating,
//!   abelian, factorial, purely infinite parts) with its cut projector;
//! * [`modular`] — Tomita data (`Delta`, `J`, `K = -log Delta`) of the
//!   standard part, the entropy form `R`, relative entropy, modular flow;
//! * [`family`] — one-parameter families `t -> L_t`, the two-variable
//!   entropy function `T_f(s,t)`, monotonicity/convexity property checks,
//!   finite-difference derivative reports, duality (DMP) probes;
//! * [`models`] — closed-form references: oscillator modes, abelian
//!   (commutative) spaces, the chiral `U(1)` current at zero and positive
//!   temperature, and a Galerkin discretization of the latter;
//! * [`exec`] — the sequential/rayon execution switch used by grid fills
//!   and randomized sweeps.
//!
//! Conventions: vectors are real coordinate columns; Gram matrices live in
//! the user's basis; `sigma(f,g) = tau(f, D g)`; the doubled scalar product
//! is `<f,g>+ = tau+(f,g) + i sigma+(f,g)` with `sigma+ = tau+(., -i+ .)`,
//! antilinear in the first slot.

pub mod error;
pub mod exec;
pub mod family;
pub mod linalg;
pub mod models;
pub mod modular;
pub mod purify;
pub mod space;
pub mod subspace;

pub use error::{Error, Result};
pub use family::{
    build_family, check_table, derivative_report, dmp_check, property_suite, t_table, tf,
    DerivativeReport, DmpReport, Family, FamilySpec, ModelFamily, Probe, PropertyKind,
    PropertyReport, TfTable,
};
pub use modular::{
    entropy_form, invariant_report, modular_data, pf_via_modular, EntropyForm, EntropyValue,
    InvariantReport, ModularData,
};
pub use purify::{purify, PureSpace, PurifyOptions};
pub use space::{SymplecticHilbertSpace, Tolerances, ValidationReport};
pub use subspace::{decompose, decompose_base, ComponentSplit, Decomposition, Subspace};
