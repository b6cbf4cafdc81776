//! Numerical laboratory for random symmetric polytopes spanned by points
//! drawn from the cone probability measure on the boundary of a symmetric
//! convex body.
//!
//! The crate provides:
//!
//! * [`body`] — symmetric convex bodies (ℓp balls, boxes, H-polytopes and
//!   linear images) with Minkowski-functional, volume, covariance and
//!   isotropic-normalization oracles;
//! * [`sampling`] — reproducible i.i.d. samplers for the uniform distribution
//!   in a body and the cone measure on its boundary, including the coupled
//!   construction that realizes both on one probability space;
//! * [`hull`] — exact facet enumeration of symmetric convex hulls in low
//!   dimension, with exact volume, moment and `∫‖x‖₁` computations;
//! * [`isotropy`] — isotropic constants of polytopes and the chain of
//!   facet-based upper bounds;
//! * [`concentration`] — Orlicz-norm estimation, exact ℓ1-ball moments, the
//!   uniform-to-cone moment transfer, ψ₂/ψ₁ verification and Bernstein tail
//!   bounds;
//! * [`experiment`] — config-driven experiment and verification runs with
//!   deterministic, seed-reproducible CSV/JSON reports.

pub mod body;
pub mod concentration;
pub mod experiment;
pub mod hull;
pub mod isotropy;
pub mod sampling;
pub mod scalar;
pub mod stats;

pub use body::{BodySpec, IsotropicProfile, PNorm};
pub use hull::{build_hull, Facet, HullError, SymmetricPolytope};
pub use isotropy::{bound_chain, isotropic_constant_polytope, max_subset_sign_sum, BoundChain, L1Mode};
pub use sampling::{DistributionKind, SampleBatch, StreamRng};
pub use scalar::{GeomScalar, Rational};
