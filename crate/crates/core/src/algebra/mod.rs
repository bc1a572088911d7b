//! Polynomial and rational arithmetic over [`Scalar`](crate::Scalar), expansions
//! at infinity, and polynomial root finding.

mod polynomial;
mod rational;
mod roots;

pub use polynomial::Polynomial;
pub use rational::{laurent_expand_rational, poly_gcd, LaurentTail, RationalFn};
pub use roots::poly_roots;
