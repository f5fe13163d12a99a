//! Combinatorial verification engine for the fibration of cusped hyperbolic
//! 5-manifolds tessellated by copies of a right-angled 5-polytope.

pub mod cells;
pub mod coloring;
pub mod complex;
pub mod error;
pub mod fiber;
pub mod homology;
pub mod lattice;
pub mod morse;
pub mod n5;
pub mod orientation;
pub mod polytope;
pub mod report;
pub mod states;
pub mod triangulation;

pub use error::{ComplexError, Error, ParseError, Result};
