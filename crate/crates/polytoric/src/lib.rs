//! Distances on convex polytopes and the metric geometry of their toric manifolds.
//!
//! The crate has three layers:
//!
//! * an exact polytope kernel ([`polytope`]) over arbitrary-precision
//!   rationals: H/V representations, volumes, moments, faces;
//! * Delzant verification and lattice machinery ([`delzant`]) together with
//!   the three distance functions on convex bodies ([`distances`]): Hausdorff,
//!   symmetric-difference volume, and L2-Wasserstein between the uniform
//!   probability measures;
//! * the Guillemin metric on the symplectic toric manifold of a Delzant
//!   polytope ([`guillemin`], [`sample`]) and numerical Gromov-Hausdorff
//!   convergence diagnostics ([`convergence`]).
//!
//! Combinatorial predicates (vertex enumeration, redundancy, the vertex
//! determinant test) run in exact rational arithmetic; metric quantities
//! (distances, geodesics, transport) run in `f64`. The shared linear algebra
//! in [`linalg`] is generic over the scalar via `num-traits`, so the same
//! elimination code backs both.

pub mod acceptance;
pub mod catalog;
pub mod convergence;
pub mod delzant;
pub mod distances;
pub mod error;
pub mod guillemin;
pub mod lattice;
pub mod linalg;
pub mod measure;
pub mod ot;
pub mod polytope;
pub mod rat;
pub mod sample;
pub mod scalar;
pub mod testfns;
pub mod tol;

/// Arbitrary-precision integer used for lattice data (normals, edge
/// directions, unimodular matrices).
pub type Int = num_bigint::BigInt;

/// Exact rational scalar: all combinatorial geometry runs over this type.
pub type Rat = num_rational::BigRational;

/// Floating-point scalar for metric quantities.
pub type Real = f64;

pub use error::Error;
pub use polytope::{Face, HPolytope, VPolytope};

/// Convenience result alias.
pub type Result<T> = std::result::Result<T, Error>;
