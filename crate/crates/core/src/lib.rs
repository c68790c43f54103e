//! Exact second-order variational analysis for compositions ϑ∘f of a convex
//! piecewise linear-quadratic ϑ with a polynomial map f.

pub mod error;
pub mod exec;
pub mod linprog;
pub mod numeric;
pub mod polyhedra;
pub mod pwlq;
pub mod copositivity;
pub mod composite;
pub mod optimality;
pub mod kkt;
pub mod oracle;
pub mod verify;
pub mod suite;
pub mod problem;
pub mod report;
pub mod verdict;

pub use error::{Error, Result};
