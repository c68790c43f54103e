//! Convex polyhedra with exact H- and V-representations.

mod dd;
pub mod json;
mod polyhedron;

pub use dd::{cone_generators, ConeGenerators};
pub use polyhedron::{Constraint, Generators, PolyUnion, Polyhedron};
