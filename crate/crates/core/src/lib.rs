//! Hermite–Padé approximation of Nikishin systems perturbed by rational
//! functions, at configurable precision.
//!
//! The crate builds atomic surrogates of the generating measures, forms the
//! nested Nikishin products, solves the type I and type II order conditions as
//! high-precision nullspace problems, and measures how fast the resulting
//! ratios approach their limits.

pub mod algebra;
pub mod analysis;
pub mod error;
pub mod hermite_pade;
pub mod linalg;
pub mod measures;
pub mod nikishin;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Complex, Precision, Scalar};
