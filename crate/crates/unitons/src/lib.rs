//! Uniton factorization and deformation of polynomial unitary loops.
//!
//! The crate implements, numerically:
//!
//! * Blaschke-Potapov products b(λ) = Π (π_{α_j} + λ π_{α_j}^⊥) and their
//!   recovery from the Segal filtration of the shift-invariant subspace
//!   W = b H_+ of the Hardy space of C^n-valued functions;
//! * the deformation family μ ↦ b^μ obtained by transforming a
//!   degree-graded basis of W^⊥, continuous down to the singular value
//!   μ = 0 where the limit is S^1-invariant;
//! * finite-difference diagnostics for extended solutions Φ(λ, z) of the
//!   harmonic map equations on a plane domain, and the structure of the
//!   μ = 0 limit (nested bundles, integer rotation spectrum).

pub mod deformation;
pub mod error;
pub mod factorization;
pub mod frontend;
pub mod geometry;
pub mod grassmann;
pub mod linalg;
pub mod looppoly;

pub use error::{Error, Result};
