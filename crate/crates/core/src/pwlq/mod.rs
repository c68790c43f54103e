//! Convex piecewise linear-quadratic functions and their first- and
//! second-order objects.

mod enlp;
mod function;
pub mod json;

pub use function::{Convexity, CriticalCone, Piece, PwlqFunction};
