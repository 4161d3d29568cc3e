//! Approximation of real primitive Dirichlet L-functions by finite Dirichlet
//! series interpolated at generalized Gram points or at known critical-line
//! zeros, and discovery of further zeros from the resulting approximants.
//!
//! The crate is organised bottom-up:
//!
//! - [`mpnum`]: arbitrary-precision scalars (MPFR-backed reals, a complex
//!   type on top of them) and the special functions the rest needs.
//! - [`characters`]: Kronecker symbols and real primitive characters.
//! - [`lref`]: reference evaluation of `L(s, χ)`, `θ(t, χ)` and `Z(t, χ)`.
//! - [`gramzero`]: generalized Gram points and critical-line zeros.
//! - [`solve`]: dense LU and GMRES solvers, generic over [`Scalar`].
//! - [`interp`]: interpolation systems, approximants and zero discovery.
//! - [`lasso`]: the coordinate-descent lasso feature-selection experiment.

pub mod characters;
pub mod error;
pub mod gramzero;
pub mod interp;
pub mod lasso;
pub mod lref;
pub mod mpnum;
pub mod scalar;
pub mod solve;

pub use error::{Error, Result};
pub use mpnum::{BigComplex, PrecisionContext};
pub use scalar::{RealScalar, Scalar};

/// Arbitrary-precision real number. Precision travels with each value.
pub type BigReal = rug::Float;
/// Exact rational scalar, used for exact reference solves.
pub type ExactRational = rug::Rational;

/// Dense matrix over arbitrary-precision reals.
pub type BigMatrix = solve::DenseMatrix<BigReal>;
/// Dense matrix over `f64`.
pub type F64Matrix = solve::DenseMatrix<f64>;
/// Dense matrix over `f32`.
pub type F32Matrix = solve::DenseMatrix<f32>;
/// Dense matrix over exact rationals.
pub type RationalMatrix = solve::DenseMatrix<ExactRational>;
