//! Normalized Atiyah-Sutcliffe determinant of point configurations in R³.
//!
//! `D(x) = det(A) / δ(t)` is computed three ways: by direct elimination
//! ([`det`]), as a normalized sum over row permutations ([`perm`]), and for
//! four points by the closed angular expression in [`angular`]. The
//! [`discovery`] module recovers angular expressions from samples, and
//! [`harness`] drives generators, cross-checks and conjecture scans.
//!
//! The numeric modules are generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the double-precision instantiation used by the tools.

// `!(x <= tol)` is used on purpose so that NaN fails a check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod det;
pub mod discovery;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod parallel;
pub mod perm;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

pub type Point3f64 = geometry::Point3<f64>;
pub type Configuration64 = geometry::Configuration<f64>;
pub type Configuration32 = geometry::Configuration<f32>;
pub type DirectionTable64 = geometry::DirectionTable<f64>;
pub type Spinor64 = geometry::Spinor<f64>;
pub type DeterminantResult64 = det::DeterminantResult<f64>;
pub type Complex64 = Cplx<f64>;
/// Exact coefficients of invariant terms.
pub type Coefficient = num_rational::Rational64;
