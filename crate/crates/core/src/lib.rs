//! Rigorous high-precision approximation of the affinity dimension of affine
//! iterated function systems whose linear parts are dominated.
//!
//! The pipeline is: exact products of the linear parts over words (or
//! necklace classes of words), certified leading eigenvalues of their
//! exterior powers, the traces `t_n(s)`, the coefficients `a_n(s)` of the
//! truncated Fredholm determinant, its smallest positive root `r_n(s)`, and
//! finally the secant solve of `1/r_n(s) = 1` for `s`.

pub mod bigreal;
pub mod certify;
pub mod discretize;
pub mod error;
pub mod fredholm;
pub mod linalg;
pub mod solver;
pub mod traces;

pub use bigreal::BigReal;
pub use error::{Error, Result};
pub use rug::Rational;
