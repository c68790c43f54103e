//! Exact scalars, vectors, matrices and polynomials.

pub mod linalg;
pub mod poly;
pub mod scalar;

pub use linalg::{hessian_apply, Matrix, SymMatrix, Vector};
pub use poly::Polynomial;
pub use scalar::{int, parse_scalar, rat, ExtScalar, Scalar};
